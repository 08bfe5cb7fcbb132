import csv
import json

import pytest
import yaml

import vantage.pipeline as pipeline_module
from vantage import load_model_spec
from vantage._resources import demo_config_path
from vantage.cli import main
from vantage.pipeline import (
    PipelineError,
    ResultsBundle,
    load_results,
    render_report,
    run_analysis_pipeline,
)


def mini_config(tmp_path, **changes):
    """Fast variant of the demo config for CLI-level tests."""
    raw = yaml.safe_load(demo_config_path().read_text())
    raw["psa"]["iterations"] = 40
    raw["psa"]["distributions"] = raw["psa"]["distributions"][:2]
    raw.update(changes)
    path = tmp_path / "mini.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


class TestPipelineOutputs:
    def test_demo_discordance_recorded(self, demo_output):
        _, bundle = demo_output
        det = bundle.deterministic["perspectives"]
        assert det["health_system"]["decision"]["chosen_strategy"] == "StandardCare"
        assert det["societal"]["decision"]["chosen_strategy"] == "Prevention"
        assert det["health_system"]["decision"]["discordant_with"] == "societal"
        assert bundle.voi["deterministic_vop"] > 0
        assert bundle.voi["evop"] > 0
        assert bundle.voi["discordance_probability"] > 0.5

    def test_expected_files_exist(self, demo_output):
        out_dir, _ = demo_output
        expected = {
            "results.json",
            "report.md",
            "voi.json",
            "psa_samples.csv",
            "ceac.csv",
            "equity_plane.csv",
            "tornado.csv",
            "sobol.csv",
            "bia.csv",
            "coi.csv",
            "trace_StandardCare.csv",
            "trace_Prevention.csv",
        }
        assert expected.issubset({p.name for p in out_dir.iterdir()})
        assert not (out_dir / "quarantine").exists()

    def test_bundle_reload_reproduces_decisions(self, demo_output):
        out_dir, _ = demo_output
        bundle = load_results(out_dir / "results.json")
        wtp = bundle.manifest["wtp_threshold"]
        comparator = bundle.manifest["comparator"]
        for perspective, components in (
            ("health_system", ("cost_direct_medical",)),
            (
                "societal",
                ("cost_direct_medical", "cost_productivity", "cost_out_of_pocket"),
            ),
        ):
            stored = bundle.deterministic["perspectives"][perspective]["decision"]
            nmbs = {}
            for name, comp_values in bundle.deterministic["per_strategy"].items():
                cost = sum(comp_values[c] for c in components)
                nmbs[name] = comp_values["qalys"] * wtp - cost
            best_other = max(
                (n for n in nmbs if n != comparator), key=lambda n: nmbs[n]
            )
            chosen = (
                best_other if nmbs[best_other] > nmbs[comparator] + 1e-9 else comparator
            )
            assert chosen == stored["chosen_strategy"]
            for name, value in stored["nmb_per_strategy"].items():
                assert nmbs[name] == value  # exact float round-trip through JSON

    def test_ceac_reproducible_from_samples_csv(self, demo_output):
        out_dir, bundle = demo_output
        with open(out_dir / "psa_samples.csv") as fh:
            rows = list(csv.DictReader(fh))
        shares = {
            g["name"]: g["population_share"] for g in bundle.manifest["subgroups"]
        }
        strategies = bundle.manifest["strategies"]
        comparator = bundle.manifest["comparator"]
        stored = bundle.psa_summary["ceac"]
        for li, wtp in enumerate(stored["wtp_grid"]):
            counts = {name: 0 for name in strategies}
            for row in rows:
                nmbs = {}
                for s in strategies:
                    cost = sum(
                        shares[g]
                        * (
                            float(row[f"{s}.{g}.cost_direct"])
                            + float(row[f"{s}.{g}.cost_prod"])
                            + float(row[f"{s}.{g}.cost_oop"])
                        )
                        for g in shares
                    )
                    qalys = sum(
                        shares[g] * float(row[f"{s}.{g}.qalys"]) for g in shares
                    )
                    nmbs[s] = qalys * wtp - cost
                best_other = max(
                    (s for s in nmbs if s != comparator), key=lambda s: nmbs[s]
                )
                chosen = (
                    best_other
                    if nmbs[best_other] > nmbs[comparator] + 1e-9
                    else comparator
                )
                counts[chosen] += 1
            for k, name in enumerate(strategies):
                assert stored["societal"][li][k] == counts[name] / len(rows)

    def test_analysis_failure_leaves_simulation_in_quarantine(
        self, demo_spec, tmp_path, monkeypatch
    ):
        def boom(*args, **kwargs):
            raise RuntimeError("synthetic analysis failure")

        monkeypatch.setattr(pipeline_module, "ceac", boom)
        out = tmp_path / "broken"
        with pytest.raises(PipelineError) as exc:
            run_analysis_pipeline(demo_spec, out)
        assert exc.value.stage == "analysis"
        quarantine = out / "quarantine"
        assert quarantine.exists()
        names = {p.name for p in quarantine.iterdir()}
        assert "trace_StandardCare.csv" in names  # simulation output preserved
        assert "psa_samples.csv" in names
        assert not (out / "results.json").exists()


class TestReport:
    def test_decision_table_row(self, demo_output):
        out_dir, _ = demo_output
        report = (out_dir / "report.md").read_text()
        assert "| Prevention | Reject | Accept |" in report
        assert "WTP threshold of $20,000/QALY" in report

    def test_zero_vop_renders_dollar_zero(self, demo_output):
        _, bundle = demo_output
        edited = ResultsBundle(
            manifest=bundle.manifest,
            deterministic={
                **bundle.deterministic,
                "vop": {"deterministic_loss": 0.0},
            },
            psa_summary=bundle.psa_summary,
            dcea=bundle.dcea,
            voi={**bundle.voi, "deterministic_vop": 0.0},
            bia=bundle.bia,
            coi=bundle.coi,
            sensitivity=bundle.sensitivity,
            files=bundle.files,
        )
        report = render_report(edited)
        assert "| $0 |" in report

    def test_optional_sections_omitted(self, demo_output):
        _, bundle = demo_output
        no_bia = ResultsBundle(
            manifest=bundle.manifest,
            deterministic=bundle.deterministic,
            psa_summary=bundle.psa_summary,
            dcea=bundle.dcea,
            voi=bundle.voi,
            bia=None,
            coi=bundle.coi,
            sensitivity={"tornado": None, "sobol": None},
            files=bundle.files,
        )
        report = render_report(no_bia)
        assert "## Budget impact" not in report
        assert "## Cost of illness" in report


class TestCli:
    def test_init_creates_skeleton(self, tmp_path):
        target = tmp_path / "fresh"
        assert main(["init", str(target)]) == 0
        names = {p.name for p in target.iterdir()}
        assert names == {"demo_discordance.yaml", "reference.yaml", "README.md"}
        load_model_spec(target / "demo_discordance.yaml")
        load_model_spec(target / "reference.yaml")

    def test_init_refuses_nonempty(self, tmp_path, capsys):
        target = tmp_path / "busy"
        target.mkdir()
        (target / "keep.txt").write_text("data")
        assert main(["init", str(target)]) == 1
        assert "non-empty" in capsys.readouterr().err

    def test_run_records_flag_overrides(self, tmp_path):
        config = mini_config(tmp_path)
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--config",
                str(config),
                "--output-dir",
                str(out),
                "--seed",
                "42",
                "--iterations",
                "25",
            ]
        )
        assert code == 0
        results = json.loads((out / "results.json").read_text())
        assert results["manifest"]["master_seed"] == 42
        assert results["manifest"]["iterations"] == 25

    def test_run_wtp_override_changes_decision(self, tmp_path):
        config = mini_config(tmp_path)
        out = tmp_path / "out50"
        code = main(
            ["run", "--config", str(config), "--output-dir", str(out), "--wtp", "50000"]
        )
        assert code == 0
        results = json.loads((out / "results.json").read_text())
        det = results["deterministic"]["perspectives"]
        assert det["health_system"]["decision"]["chosen_strategy"] == "Prevention"
        assert results["voi"]["deterministic_vop"] == 0.0

    def test_missing_config_exits_one(self, tmp_path, capsys):
        code = main(
            ["run", "--config", str(tmp_path / "absent.yaml"), "--output-dir", "x"]
        )
        assert code == 1
        assert "absent.yaml" in capsys.readouterr().err

    def test_invalid_config_exits_one_without_results(self, tmp_path, capsys):
        raw = yaml.safe_load(demo_config_path().read_text())
        raw["inequality_aversion"] = -2.0
        bad = tmp_path / "bad.yaml"
        bad.write_text(yaml.safe_dump(raw))
        out = tmp_path / "nothing"
        assert main(["run", "--config", str(bad), "--output-dir", str(out)]) == 1
        assert not (out / "results.json").exists()

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--frobnicate"])
        assert exc.value.code == 2

    def test_invalid_override_value_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--iterations", "0"])
        assert exc.value.code == 2

    def test_format_json_skips_csv(self, tmp_path):
        config = mini_config(tmp_path)
        out = tmp_path / "json_only"
        assert (
            main(
                [
                    "run",
                    "--config",
                    str(config),
                    "--output-dir",
                    str(out),
                    "--format",
                    "json",
                ]
            )
            == 0
        )
        names = {p.name for p in out.iterdir()}
        assert "results.json" in names and "report.md" in names
        assert not any(n.endswith(".csv") for n in names)
