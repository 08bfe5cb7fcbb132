"""Command-line interface: project scaffolding and the analysis pipeline.

Exit codes: 0 success, 1 I/O or configuration error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .__about__ import __version__
from ._resources import demo_config_path, reference_config_path
from .config import ConfigError, load_model_spec, validate_model_spec
from .pipeline import PipelineError, run_analysis_pipeline

INIT_README = """\
# Decision model project

Generated by `vantage init`.

Files:
- `demo_discordance.yaml` - a runnable demonstration model whose two
  accounting perspectives disagree at the configured threshold.
- `reference.yaml` - a fully commented reference configuration documenting
  every supported key; copy it as the starting point for your own model.

Run the full analysis pipeline:

    vantage run --config demo_discordance.yaml --output-dir results

Outputs land in the output directory: `results.json` (machine-readable
bundle), `report.md`, and CSV sidecars (`psa_samples.csv`, `ceac.csv`,
`equity_plane.csv`, `tornado.csv`, `sobol.csv`, `bia.csv`, `coi.csv`,
`trace_<strategy>.csv`).
"""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _seed_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vantage",
        description=(
            "Multi-perspective, equity-aware cost-effectiveness analysis."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init", help="create a new project skeleton")
    p_init.add_argument("project_dir", help="directory to create (absent or empty)")

    p_run = sub.add_parser("run", help="run the full analysis pipeline")
    p_run.add_argument(
        "--config", default="demo_discordance.yaml", help="model configuration file"
    )
    p_run.add_argument("--output-dir", default="results", help="where to write results")
    p_run.add_argument(
        "--iterations", type=_positive_int, default=None, help="override PSA iterations"
    )
    p_run.add_argument(
        "--seed", type=_seed_int, default=None, help="override the PSA master seed"
    )
    p_run.add_argument(
        "--wtp",
        type=_nonnegative_float,
        default=None,
        help="override the willingness-to-pay threshold",
    )
    p_run.add_argument(
        "--epsilon",
        type=_nonnegative_float,
        default=None,
        help="override the inequality aversion",
    )
    p_run.add_argument(
        "--perspective",
        choices=("hs", "societal", "both"),
        default="both",
        help="perspective emphasized in the report (both are always computed)",
    )
    p_run.add_argument(
        "--format",
        choices=("json", "csv", "all"),
        default="all",
        dest="output_format",
        help="which artifact families to write",
    )
    return parser


def cmd_init(project_dir: str) -> int:
    target = Path(project_dir)
    if target.exists():
        if not target.is_dir():
            print(f"error: {target} exists and is not a directory", file=sys.stderr)
            return 1
        if any(target.iterdir()):
            print(
                f"error: refusing to initialize non-empty directory {target}",
                file=sys.stderr,
            )
            return 1
    else:
        target.mkdir(parents=True)
    (target / "demo_discordance.yaml").write_text(demo_config_path().read_text())
    (target / "reference.yaml").write_text(reference_config_path().read_text())
    (target / "README.md").write_text(INIT_README)
    print(f"initialized project in {target}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        spec = load_model_spec(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.iterations is not None or args.seed is not None:
        psa = spec.psa
        psa = replace(
            psa,
            iterations=args.iterations if args.iterations is not None else psa.iterations,
            seed=args.seed if args.seed is not None else psa.seed,
        )
        spec = replace(spec, psa=psa)
    if args.wtp is not None:
        spec = replace(spec, wtp_threshold=args.wtp)
    if args.epsilon is not None:
        spec = replace(spec, inequality_aversion=args.epsilon)

    for warning in validate_model_spec(spec).warnings:
        print(f"warning: {warning}", file=sys.stderr)

    perspective = {"hs": "health_system"}.get(args.perspective, args.perspective)
    try:
        bundle = run_analysis_pipeline(
            spec,
            args.output_dir,
            report_perspective=perspective,
            output_format=args.output_format,
        )
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    det = bundle.deterministic["perspectives"]
    comparator = bundle.manifest["comparator"]
    for name in ("health_system", "societal"):
        decision = det[name]["decision"]
        word = (
            "reject (keep comparator)"
            if decision["chosen_strategy"] == comparator
            else f"accept {decision['chosen_strategy']}"
        )
        print(f"{name}: {word}")
    print(
        f"deterministic perspective loss: "
        f"{bundle.voi['deterministic_vop']:.2f} per person; "
        f"EVoP: {bundle.voi['evop']:.2f}; "
        f"discordance probability: {bundle.voi['discordance_probability']:.3f}"
    )
    print(f"results written to {args.output_dir}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "init":
        return cmd_init(args.project_dir)
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
