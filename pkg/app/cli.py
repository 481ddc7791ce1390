"""
Command line entry point.

    python -m app.cli synth --out data/dataset --seed 7
    python -m app.cli validate --dataset data/dataset
    python -m app.cli run --dataset data/dataset --output data/runs/demo --statistic median --statistic p80

Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.core.dependencies import get_dataset_manager, load_config
from app.domain.errors import DatasetValidationError, PowerRiskError
from app.domain.models import PipelineConfig, ValidationReport
from app.services.pipeline import PipelineService
from app.services.synthesis import SynthOptions, SyntheticDatasetService

logger = logging.getLogger("app.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def _add_dataset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", dest="dataset_dir", help="Dataset directory (CSV files).")


def _add_pipeline(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring PipelineConfig; anything left out keeps the YAML or default value."""
    _add_dataset(parser)
    parser.add_argument("--config", type=Path, help="YAML file with PipelineConfig fields.")
    parser.add_argument("--output", dest="output_dir", help="Artifact directory.")
    parser.add_argument("--scenario", dest="scenarios", action="append", choices=["RCP2.6", "RCP8.5"])
    parser.add_argument("--statistic", dest="statistics", action="append", choices=["median", "min2", "p80", "max2"])
    parser.add_argument("--window", dest="windows", action="append", choices=["2010s", "2020s", "2030s", "2040s"])
    parser.add_argument("--per-capita", dest="per_capita_m3", type=float, help="Demand per capita (m3/year).")
    parser.add_argument("--demand-mode", choices=["absolute", "change"])
    parser.add_argument("--alpha", type=float, help="Trend test significance level.")
    parser.add_argument("--min-record-years", type=int)
    parser.add_argument("--radius-km", dest="gauge_radius_km", type=float, help="Plant-to-gauge link radius.")
    parser.add_argument("--aggregation", dest="aggregation_mode", choices=["conjunctive", "disjunctive"])
    parser.add_argument("--capacity-factor", dest="default_capacity_factor", type=float)
    parser.add_argument("--predictor-model", choices=["model1", "model2", "model3", "model4"])
    parser.add_argument("--predictor-statistic", choices=["median", "p80"])
    parser.add_argument("--compare-predictors", action="store_true", default=None)
    parser.add_argument("--include-members", action="store_true", default=None)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerrisk",
        description="County water-scarcity and stream-temperature risk to thermoelectric generation.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="Check a dataset directory.")
    _add_dataset(p)
    _add_common(p)

    p = commands.add_parser("synth", help="Write a synthetic dataset with a truth.json sidecar.")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counties", type=int, default=12)
    p.add_argument("--gauges", type=int, default=8)
    p.add_argument("--plants", type=int, default=10)
    p.add_argument("--scenario", dest="scenarios", action="append", choices=["RCP2.6", "RCP8.5"])
    _add_common(p)

    for name, text in (
        ("run", "Run every stage."),
        ("waaci", "Water budget only."),
        ("trend", "Historical stream temperature trends only."),
        ("project", "Stream temperature projections only."),
        ("risk", "County risk reports (recomputes water budget and projections)."),
    ):
        p = commands.add_parser(name, help=text)
        _add_pipeline(p)
        _add_common(p)

    p = commands.add_parser("serve", help="Serve the report API with uvicorn.")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--reload", action="store_true")
    _add_common(p)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    fields = PipelineConfig.model_fields
    return {k: v for k, v in vars(args).items() if k in fields and v is not None}


def _print_report(report: ValidationReport) -> None:
    for issue in report.warnings:
        print(f"warning: {issue}", file=sys.stderr)
    for issue in report.errors:
        print(f"error: {issue}", file=sys.stderr)
    status = "ok" if report.ok else "FAILED"
    print(f"{report.dataset_dir}: {status} ({len(report.errors)} errors, {len(report.warnings)} warnings)")


def _validate(dataset_dir: Path) -> bool:
    report = get_dataset_manager(dataset_dir).validate()
    _print_report(report)
    return report.ok


def _run_stage(command: str, config: PipelineConfig) -> None:
    dataset = get_dataset_manager(Path(config.dataset_dir))
    service = PipelineService(dataset, config)
    service.write_config()
    if command == "run":
        service.run()
    elif command == "trend":
        service.run_trends()
    else:
        for scenario in config.scenarios:
            if command == "waaci":
                service.run_waaci(scenario)
            elif command == "project":
                service.run_projections(scenario)
            else:
                service.run_risk(scenario, service.compute_waaci(scenario), service.compute_projections(scenario))
    for path in service.writer.written:
        print(Path(config.output_dir) / path)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, force=True)

    try:
        if args.command == "serve":
            import uvicorn

            uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
            return EXIT_OK

        if args.command == "synth":
            options = SynthOptions(
                seed=args.seed,
                counties=args.counties,
                gauges=args.gauges,
                plants=args.plants,
                scenarios=args.scenarios or ["RCP8.5"],
            )
            truth = SyntheticDatasetService(args.out, options).generate()
            print(f"{args.out}: synthetic dataset written ({len(truth['planted_trends'])} planted trends)")
            return EXIT_OK

        if args.command == "validate":
            config = load_config(overrides={"dataset_dir": args.dataset_dir})
            return EXIT_OK if _validate(Path(config.dataset_dir)) else EXIT_VALIDATION

        config = load_config(args.config, _overrides(args))
        if not _validate(Path(config.dataset_dir)):
            return EXIT_VALIDATION
        _run_stage(args.command, config)
        return EXIT_OK
    except DatasetValidationError as e:
        print(f"error [{e.module}]: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except PowerRiskError as e:
        logger.debug("Pipeline failed", exc_info=True)
        print(f"error [{e.module}]: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
