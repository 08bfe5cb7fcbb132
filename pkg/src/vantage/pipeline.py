"""End-to-end analysis pipeline and result emission.

Stages run in a fixed order: ingestion (caller supplies a validated spec),
simulation (deterministic cohort runs), aggregation (perspective arithmetic),
analysis (PSA, equity, value of information, sensitivity, budget impact),
and reporting (results.json, CSV sidecars, Markdown report).

All artifacts are first written into a `quarantine/` subdirectory of the
output directory and promoted only when every stage succeeded, so a failed
run never leaves half-written final files; whatever the failing stage
produced stays in quarantine for debugging.

Given the same configuration and master seed, every output byte is
reproducible except the single `generated_at` manifest field.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np

from . import __about__
from .budget import budget_impact, cost_of_illness, write_bia_csv, write_coi_csv
from .config import ModelSpec, resolve_subgroup_spec, spec_digest
from .equity import (
    atkinson_weights,
    equity_plane,
    equity_weighted_nmb,
    write_equity_plane_csv,
)
from .markov import CohortTrace, OutcomeLedger, combine_ledgers, run_strategy
from .metrics import HEALTH_SYSTEM, SOCIETAL, Perspective, decide, icer
from .psa import (
    PsaBundle,
    ceac,
    ce_plane_points,
    delta_nmb_distribution,
    run_psa,
    write_samples_csv,
)
from .sensitivity import sobol_indices, tornado, write_sobol_csv, write_tornado_csv
from .voi import deterministic_vop, evop, evpi, evppi, population_evpi

CEAC_GRID = tuple(float(v) for v in range(0, 150001, 5000))
EPSILON_GRID = tuple(round(0.25 * i, 2) for i in range(13))  # 0.0 .. 3.0


class PipelineError(RuntimeError):
    """A stage failed; the stage name travels with the error."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")


@dataclass
class ResultsBundle:
    """Everything a downstream consumer needs, JSON-serializable.

    Per-iteration detail stays in the CSV sidecars referenced by `files`;
    the JSON itself holds the deterministic results and summaries.
    """

    manifest: dict[str, Any]
    deterministic: dict[str, Any]
    psa_summary: dict[str, Any]
    dcea: dict[str, Any]
    voi: dict[str, Any]
    bia: Optional[dict[str, Any]]
    coi: dict[str, Any]
    sensitivity: dict[str, Any]
    files: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "manifest": self.manifest,
            "deterministic": self.deterministic,
            "psa_summary": self.psa_summary,
            "dcea": self.dcea,
            "voi": self.voi,
            "bia": self.bia,
            "coi": self.coi,
            "sensitivity": self.sensitivity,
            "files": self.files,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ResultsBundle":
        data = json.loads(text)
        return cls(
            manifest=data["manifest"],
            deterministic=data["deterministic"],
            psa_summary=data["psa_summary"],
            dcea=data["dcea"],
            voi=data["voi"],
            bia=data.get("bia"),
            coi=data["coi"],
            sensitivity=data.get("sensitivity", {}),
            files=data.get("files", {}),
        )


def load_results(path: Union[str, Path]) -> ResultsBundle:
    return ResultsBundle.from_json(Path(path).read_text())


def _ledger_components(led: OutcomeLedger) -> dict[str, float]:
    return {
        "cost_direct_medical": led.cost_direct_medical,
        "cost_productivity": led.cost_productivity,
        "cost_out_of_pocket": led.cost_out_of_pocket,
        "qalys": led.qalys,
    }


def _decision_to_dict(record) -> dict[str, Any]:
    return {
        "wtp": record.wtp,
        "perspective": record.perspective,
        "chosen_strategy": record.chosen_strategy,
        "nmb_per_strategy": dict(record.nmb_per_strategy),
        "discordant_with": record.discordant_with,
    }


def _icer_to_dict(result) -> dict[str, Any]:
    return {
        "delta_cost": result.delta_cost,
        "delta_effect": result.delta_effect,
        "classification": result.classification,
        "icer_value": result.icer_value,
    }


def run_analysis_pipeline(
    spec: ModelSpec,
    output_dir: Union[str, Path],
    *,
    sobol_base_samples: int = 1024,
    report_perspective: str = "both",
    output_format: str = "all",
) -> ResultsBundle:
    """Execute every stage and write the full artifact set.

    `output_format`: "all" writes everything, "json" only results.json and
    report.md, "csv" only the CSV sidecars.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    quarantine = out / "quarantine"
    if quarantine.exists():
        shutil.rmtree(quarantine)
    quarantine.mkdir()

    write_csv = output_format in ("all", "csv")
    write_json = output_format in ("all", "json")
    files: dict[str, str] = {}

    # --- Simulation: deterministic cohort runs per subgroup and strategy ---
    stage = "simulation"
    try:
        subgroup_views = [resolve_subgroup_spec(spec, g) for g in spec.subgroups]
        shares = [g.population_share for g in spec.subgroups]
        ledgers_by_subgroup: dict[str, dict[str, OutcomeLedger]] = {}
        traces_by_strategy: dict[str, list[np.ndarray]] = {
            s.name: [] for s in spec.strategies
        }
        for g, view in zip(spec.subgroups, subgroup_views):
            ledgers_by_subgroup[g.name] = {}
            for strategy in spec.strategies:
                trace, led = run_strategy(view, strategy)
                ledgers_by_subgroup[g.name][strategy.name] = led
                traces_by_strategy[strategy.name].append(trace.occupancy)
        population_ledgers = {
            s.name: combine_ledgers(
                [ledgers_by_subgroup[g.name][s.name] for g in spec.subgroups], shares
            )
            for s in spec.strategies
        }
        population_traces = {
            name: CohortTrace(
                occupancy=sum(
                    w * occ for w, occ in zip(shares, occupancies)
                ),
                state_names=spec.state_names,
            )
            for name, occupancies in traces_by_strategy.items()
        }
        if write_csv:
            # Written as soon as they exist so a later-stage failure leaves
            # them in quarantine for debugging.
            for name, trace in population_traces.items():
                fname = f"trace_{name}.csv"
                trace.to_csv(quarantine / fname)
                files[f"trace_{name}"] = fname
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    # --- Aggregation: perspective arithmetic on the deterministic results ---
    stage = "aggregation"
    try:
        comparator_name = spec.comparator().name
        interventions = spec.interventions()
        wtp = spec.wtp_threshold
        perspectives_out: dict[str, Any] = {}
        records = {}
        for perspective in (HEALTH_SYSTEM, SOCIETAL):
            record = decide(population_ledgers, wtp, perspective, comparator_name)
            records[perspective.name] = record
            icers = {
                s.name: _icer_to_dict(
                    icer(population_ledgers[comparator_name], population_ledgers[s.name], perspective)
                )
                for s in interventions
            }
            perspectives_out[perspective.name] = {"icer": icers}
        for name, other in (("health_system", "societal"), ("societal", "health_system")):
            rec = records[name]
            discordant = (
                other
                if records[other].chosen_strategy != rec.chosen_strategy
                else None
            )
            perspectives_out[name]["decision"] = _decision_to_dict(rec) | {
                "discordant_with": discordant
            }
        base_vop = deterministic_vop(population_ledgers, wtp, comparator_name)
        subgroup_increments = {
            g.name: {
                s.name: _ledger_components(ledgers_by_subgroup[g.name][s.name])
                for s in spec.strategies
            }
            for g in spec.subgroups
        }
        deterministic = {
            "per_strategy": {
                name: _ledger_components(led)
                for name, led in population_ledgers.items()
            },
            "per_subgroup": subgroup_increments,
            "perspectives": perspectives_out,
            "vop": {"deterministic_loss": base_vop},
        }
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    # --- Analysis: PSA and everything downstream of the bundle ---
    stage = "analysis"
    try:
        bundle = run_psa(spec)
        if write_csv:
            write_samples_csv(bundle, quarantine / "psa_samples.csv")
            files["psa_samples"] = "psa_samples.csv"
        ceac_table = ceac(bundle, SOCIETAL, CEAC_GRID)
        ceac_hs = ceac(bundle, HEALTH_SYSTEM, CEAC_GRID)
        delta = delta_nmb_distribution(bundle, wtp)
        plane = {
            p.name: ce_plane_points(bundle, p) for p in (HEALTH_SYSTEM, SOCIETAL)
        }
        psa_summary = {
            "iterations": bundle.iterations,
            "ceac": {
                "wtp_grid": list(ceac_table.wtp_grid),
                "strategies": list(ceac_table.strategy_names),
                "societal": [list(row) for row in ceac_table.probabilities],
                "health_system": [list(row) for row in ceac_hs.probabilities],
            },
            "ce_plane": {
                name: {
                    "mean_delta_effect": float(res.points[:, 0].mean()),
                    "mean_delta_cost": float(res.points[:, 1].mean()),
                }
                for name, res in plane.items()
            }
            | {
                "delta_mean_cost_shift": float(
                    plane["societal"].delta_points[:, 1].mean()
                )
            },
            "delta_nmb": {
                "wtp": delta.wtp,
                "mean": delta.mean,
                "quantiles": {str(q): v for q, v in delta.quantiles.items()},
            },
        }

        weights = atkinson_weights(
            spec.subgroups, spec.inequality_aversion, spec.reference_health
        )
        intervention_name = (
            interventions[0].name if len(interventions) == 1 else None
        )
        nmb_eq_grid: dict[str, list[float]] = {"epsilon": [], "value": []}
        if intervention_name is not None:
            increments = {
                g.name: (
                    ledgers_by_subgroup[g.name][intervention_name].qalys
                    - ledgers_by_subgroup[g.name][comparator_name].qalys,
                    SOCIETAL.cost(ledgers_by_subgroup[g.name][intervention_name])
                    - SOCIETAL.cost(ledgers_by_subgroup[g.name][comparator_name]),
                )
                for g in spec.subgroups
            }
            for eps in EPSILON_GRID:
                w = atkinson_weights(spec.subgroups, eps, spec.reference_health)
                nmb_eq_grid["epsilon"].append(eps)
                nmb_eq_grid["value"].append(equity_weighted_nmb(increments, w, wtp))
        equity_points = None
        equity_summary = None
        if len(spec.subgroups) >= 2 and intervention_name is not None and wtp > 0:
            equity_points = equity_plane(bundle, wtp, spec.inequality_aversion)
            nhb = np.array([p.net_health_benefit for p in equity_points])
            impact = np.array([p.equity_impact for p in equity_points])
            equity_summary = {
                "mean_net_health_benefit": float(nhb.mean()),
                "mean_equity_impact": float(impact.mean()),
                "share_north_east": float(np.mean((nhb > 0) & (impact > 0))),
            }
        dcea = {
            "epsilon": spec.inequality_aversion,
            "reference_health": weights.reference_health,
            "weights": dict(weights.weights),
            "nmb_eq_grid": nmb_eq_grid,
            "equity_plane_summary": equity_summary,
        }

        population_size = (
            spec.bia.eligible_population if spec.bia is not None else None
        )
        evpi_values = {
            p.name: evpi(bundle, wtp, p) for p in (HEALTH_SYSTEM, SOCIETAL)
        }
        evppi_values: dict[str, dict[str, float]] = {}
        for p in (HEALTH_SYSTEM, SOCIETAL):
            evppi_values[p.name] = {
                name: evppi(bundle, [name], wtp, p)
                for name in bundle.parameter_names
            }
        vop_result = evop(bundle, wtp, deterministic_loss=base_vop)
        voi_out = {
            "evpi_per_person": evpi_values,
            "population_size": population_size,
            "population_evpi": (
                {
                    name: population_evpi(v, population_size)
                    for name, v in evpi_values.items()
                }
                if population_size is not None
                else None
            ),
            "evppi": evppi_values,
            "evop": vop_result.evop,
            "deterministic_vop": base_vop,
            "discordance_probability": vop_result.discordance_probability,
        }

        tornado_entries = None
        sobol_result = None
        sensitivity_out: dict[str, Any] = {"tornado": None, "sobol": None}
        has_scalar_dists = any(
            d.kind != "dirichlet-row" for d in spec.psa.distributions
        )
        if intervention_name is not None and has_scalar_dists:
            tornado_entries = tornado(spec, wtp=wtp)
            sensitivity_out["tornado"] = [
                {
                    "parameter": e.parameter,
                    "low": e.low_value,
                    "high": e.high_value,
                    "outcome_low": e.outcome_at_low,
                    "outcome_high": e.outcome_at_high,
                }
                for e in tornado_entries
            ]
            sobol_result = sobol_indices(spec, sobol_base_samples, wtp=wtp)
            sensitivity_out["sobol"] = {
                "parameters": list(sobol_result.parameter_names),
                "first_order": [float(v) for v in sobol_result.first_order],
                "total_order": [float(v) for v in sobol_result.total_order],
                "noise_first": [float(v) for v in sobol_result.noise_first],
                "noise_total": [float(v) for v in sobol_result.noise_total],
                "sample_size": sobol_result.sample_size,
            }

        bia_result = None
        bia_out = None
        if spec.bia is not None and intervention_name is not None:
            bia_result = budget_impact(spec)
            bia_out = {
                "perspective": bia_result.perspective,
                "discounted": bia_result.discounted,
                "rows": [asdict(r) for r in bia_result.rows],
                "cumulative": bia_result.cumulative,
            }
        coi_table = cost_of_illness(spec)
        coi_out = {"rows": [asdict(r) for r in coi_table.rows]}
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    # --- Reporting: emit artifacts into quarantine, then promote ---
    stage = "reporting"
    try:
        manifest = {
            "schema_version": 1,
            "tool": "vantage",
            "tool_version": __about__.__version__,
            "spec_digest": spec_digest(spec),
            "master_seed": spec.psa.seed,
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "wtp_threshold": wtp,
            "inequality_aversion": spec.inequality_aversion,
            "iterations": spec.psa.iterations,
            "comparator": comparator_name,
            "strategies": list(spec.strategy_names),
            "states": list(spec.state_names),
            "subgroups": [
                {
                    "name": g.name,
                    "population_share": g.population_share,
                    "baseline_health": g.baseline_health,
                }
                for g in spec.subgroups
            ],
            "horizon_cycles": spec.horizon_cycles,
            "cycle_length_years": spec.cycle_length_years,
            "discount": {
                "costs": spec.discount_rate_costs,
                "effects": spec.discount_rate_effects,
            },
            "report_perspective": report_perspective,
        }

        if write_csv:
            ceac_lines = [
                "wtp," + ",".join(ceac_table.strategy_names)
            ]
            for wtp_value, row in zip(ceac_table.wtp_grid, ceac_table.probabilities):
                ceac_lines.append(
                    f"{wtp_value!r}," + ",".join(repr(float(v)) for v in row)
                )
            (quarantine / "ceac.csv").write_text("\n".join(ceac_lines) + "\n")
            files["ceac"] = "ceac.csv"
            if equity_points is not None:
                write_equity_plane_csv(equity_points, quarantine / "equity_plane.csv")
                files["equity_plane"] = "equity_plane.csv"
            if tornado_entries is not None:
                write_tornado_csv(tornado_entries, quarantine / "tornado.csv")
                files["tornado"] = "tornado.csv"
            if sobol_result is not None:
                write_sobol_csv(sobol_result, quarantine / "sobol.csv")
                files["sobol"] = "sobol.csv"
            if bia_result is not None:
                write_bia_csv(bia_result, quarantine / "bia.csv")
                files["bia"] = "bia.csv"
            write_coi_csv(coi_table, quarantine / "coi.csv")
            files["coi"] = "coi.csv"

        bundle_out = ResultsBundle(
            manifest=manifest,
            deterministic=deterministic,
            psa_summary=psa_summary,
            dcea=dcea,
            voi=voi_out,
            bia=bia_out,
            coi=coi_out,
            sensitivity=sensitivity_out,
            files=files,
        )
        if write_json:
            (quarantine / "results.json").write_text(bundle_out.to_json() + "\n")
            (quarantine / "voi.json").write_text(
                json.dumps(voi_out, sort_keys=True, indent=2) + "\n"
            )
            (quarantine / "report.md").write_text(render_report(bundle_out))

        for item in sorted(quarantine.iterdir()):
            target = out / item.name
            if target.exists():
                target.unlink()
            shutil.move(str(item), str(target))
        quarantine.rmdir()
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    return bundle_out


# ---------------------------------------------------------------------------
# Markdown report
# ---------------------------------------------------------------------------


def _money(value: float) -> str:
    if value < 0:
        return f"-${abs(value):,.0f}"
    return f"${value:,.0f}"


def _icer_cell(icer_dict: Mapping[str, Any]) -> str:
    cls = icer_dict["classification"]
    if cls == "icer":
        return _money(icer_dict["icer_value"])
    if cls == "dominant":
        ratio = icer_dict["delta_cost"] / icer_dict["delta_effect"] if icer_dict["delta_effect"] else 0.0
        return f"{_money(ratio)} (dominant)" if icer_dict["delta_effect"] else "dominant"
    if cls == "dominated":
        return "dominated"
    return "no QALY difference"


def _decision_word(chosen: str, comparator: str) -> str:
    return "Reject" if chosen == comparator else "Accept"


def render_report(bundle: ResultsBundle) -> str:
    """Plain-language Markdown report mirroring the result tables."""
    m = bundle.manifest
    det = bundle.deterministic
    comparator = m["comparator"]
    interventions = [s for s in m["strategies"] if s != comparator]
    wtp = m["wtp_threshold"]

    lines: list[str] = []
    lines.append("# Decision analysis report")
    lines.append("")
    lines.append("## Model summary")
    lines.append("")
    lines.append(f"- States: {', '.join(m['states'])}")
    lines.append(f"- Strategies: {', '.join(m['strategies'])} (comparator: {comparator})")
    lines.append(
        "- Subgroups: "
        + ", ".join(
            f"{g['name']} (share {g['population_share']:g}, "
            f"baseline health {g['baseline_health']:g})"
            for g in m["subgroups"]
        )
    )
    lines.append(
        f"- Horizon: {m['horizon_cycles']} cycles of {m['cycle_length_years']:g} year(s); "
        f"discounting {m['discount']['costs']:.1%} costs / {m['discount']['effects']:.1%} effects"
    )
    lines.append(
        f"- Willingness to pay: {_money(wtp)}/QALY; inequality aversion: "
        f"{m['inequality_aversion']:g}; PSA iterations: {m['iterations']} "
        f"(seed {m['master_seed']})"
    )
    lines.append("")

    lines.append("## Deterministic cost-effectiveness")
    lines.append("")
    lines.append("| Intervention | Health system ICER | Societal ICER | VoP (per person) |")
    lines.append("| --- | --- | --- | --- |")
    vop_value = det["vop"]["deterministic_loss"]
    for name in interventions:
        hs = det["perspectives"]["health_system"]["icer"][name]
        soc = det["perspectives"]["societal"]["icer"][name]
        lines.append(
            f"| {name} | {_icer_cell(hs)} | {_icer_cell(soc)} | {_money(vop_value)} |"
        )
    lines.append("")
    lines.append(
        "Negative ICERs indicate cost savings; the classification column of "
        "results.json is authoritative for dominance."
    )
    lines.append("")

    lines.append("## Perspective decisions")
    lines.append("")
    lines.append("| Intervention | Health system decision | Societal decision | VoP (per person) |")
    lines.append("| --- | --- | --- | --- |")
    hs_choice = det["perspectives"]["health_system"]["decision"]["chosen_strategy"]
    soc_choice = det["perspectives"]["societal"]["decision"]["chosen_strategy"]
    for name in interventions:
        lines.append(
            f"| {name} | {_decision_word(hs_choice, comparator)} | "
            f"{_decision_word(soc_choice, comparator)} | {_money(vop_value)} |"
        )
    lines.append("")
    lines.append(f"*Decisions based on a WTP threshold of {_money(wtp)}/QALY.*")
    lines.append("")
    lines.append(
        "VoP is the per-person societal net benefit forgone when the "
        "health-system decision differs from the societal optimum."
    )
    lines.append("")

    psa = bundle.psa_summary
    lines.append("## Probabilistic analysis")
    lines.append("")
    lines.append(f"- PSA iterations: {psa['iterations']}")
    dn = psa["delta_nmb"]
    lines.append(
        f"- Societal bonus (incremental NMB, societal minus health system) at "
        f"{_money(dn['wtp'])}/QALY: mean {_money(dn['mean'])}, "
        f"95% interval [{_money(dn['quantiles']['2.5'])}, {_money(dn['quantiles']['97.5'])}]"
    )
    lines.append(
        f"- Expected value of perspective (EVoP): {_money(bundle.voi['evop'])} per person; "
        f"discordance probability {bundle.voi['discordance_probability']:.1%}"
    )
    lines.append(
        f"- Deterministic perspective loss at base parameters: "
        f"{_money(bundle.voi['deterministic_vop'])}"
    )
    for pname in ("health_system", "societal"):
        lines.append(
            f"- EVPI ({pname}): {_money(bundle.voi['evpi_per_person'][pname])} per person"
        )
    lines.append("")

    lines.append("### Cost-effectiveness acceptability (societal)")
    lines.append("")
    ceac_data = psa["ceac"]
    lines.append("| WTP | " + " | ".join(ceac_data["strategies"]) + " |")
    lines.append("| --- |" + " --- |" * len(ceac_data["strategies"]))
    for wtp_value, row in zip(ceac_data["wtp_grid"], ceac_data["societal"]):
        cells = " | ".join(f"{v:.3f}" for v in row)
        lines.append(f"| {_money(wtp_value)} | {cells} |")
    lines.append("")

    dcea = bundle.dcea
    lines.append("## Equity analysis")
    lines.append("")
    lines.append(
        f"- Inequality aversion {dcea['epsilon']:g}, reference health "
        f"{dcea['reference_health']:.4f}"
    )
    lines.append(
        "- Equity weights: "
        + ", ".join(f"{name} {w:.4f}" for name, w in dcea["weights"].items())
    )
    if dcea["nmb_eq_grid"]["epsilon"]:
        lines.append("")
        lines.append("| Aversion | Equity-weighted incremental NMB |")
        lines.append("| --- | --- |")
        for eps, value in zip(
            dcea["nmb_eq_grid"]["epsilon"], dcea["nmb_eq_grid"]["value"]
        ):
            lines.append(f"| {eps:g} | {_money(value)} |")
    if dcea["equity_plane_summary"] is not None:
        s = dcea["equity_plane_summary"]
        lines.append("")
        lines.append(
            f"- Equity plane: mean net health benefit {s['mean_net_health_benefit']:.5f} "
            f"QALY, mean equity impact {s['mean_equity_impact']:.6f}, "
            f"win-win share {s['share_north_east']:.1%}"
        )
    lines.append("")

    if bundle.sensitivity.get("sobol"):
        sob = bundle.sensitivity["sobol"]
        lines.append("## Variance decomposition (Sobol)")
        lines.append("")
        lines.append("| Parameter | First order | Total order |")
        lines.append("| --- | --- | --- |")
        order = np.argsort(sob["total_order"])[::-1]
        for j in order:
            lines.append(
                f"| {sob['parameters'][j]} | {sob['first_order'][j]:.3f} | "
                f"{sob['total_order'][j]:.3f} |"
            )
        lines.append("")

    if bundle.bia is not None:
        lines.append("## Budget impact")
        lines.append("")
        lines.append(
            f"Perspective: {bundle.bia['perspective']}; "
            f"{'discounted' if bundle.bia['discounted'] else 'undiscounted'}."
        )
        lines.append("")
        lines.append("| Year | Incremental cost per person | Uptake | Budget impact | Cumulative |")
        lines.append("| --- | --- | --- | --- | --- |")
        for row in bundle.bia["rows"]:
            lines.append(
                f"| {row['year']} | {_money(row['incremental_cost_per_person'])} | "
                f"{row['uptake']:g} | {_money(row['bi_year'])} | "
                f"{_money(row['bi_cumulative'])} |"
            )
        lines.append("")

    lines.append("## Cost of illness (status quo)")
    lines.append("")
    lines.append("| Component | Per capita / year | Population / year | Cumulative |")
    lines.append("| --- | --- | --- | --- |")
    for row in bundle.coi["rows"]:
        pop_annual = (
            "n/a" if row["population_annual"] is None else _money(row["population_annual"])
        )
        cumulative = (
            _money(row["per_capita_cumulative"])
            if row["population_cumulative"] is None
            else _money(row["population_cumulative"])
        )
        lines.append(
            f"| {row['component']} | {_money(row['per_capita_annual'])} | "
            f"{pop_annual} | {cumulative} |"
        )
    lines.append("")
    return "\n".join(lines)
