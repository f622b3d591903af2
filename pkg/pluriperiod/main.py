import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from pluriperiod.core.config import settings
from pluriperiod.core.errors import ConfigError, PluriperiodError
from pluriperiod.core.logging import configure_logging, get_logger
from pluriperiod.models.config import RunConfig

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

OVERRIDES = ("suite", "m", "n", "radius", "tol", "lam", "genus", "element_cap", "threads", "out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Numerical verification of period relations for pluricanonical forms on Riemann surfaces.",
    )
    parser.add_argument("--log-level", default=None, help="logging level (default from settings)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a verification suite and write a JSON report")
    run.add_argument("--suite", default=None, help="bol | antiderivative | periods | cocycle | cohomology | "
                                                   "bilinear | edge-moments | cross-weight | classical | all")
    run.add_argument("--config", default=None, help="JSON config file with a 'suite' key")
    run.add_argument("--out", default=None, help="report path")
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--radius", type=float, default=None, help="Poincare truncation radius R")
    run.add_argument("--m", type=int, default=None)
    run.add_argument("--n", type=int, default=None)
    run.add_argument("--tol", type=float, default=None)
    run.add_argument("--seeds", type=int, nargs="+", default=None, help="seed exponents nu")
    run.add_argument("--lam", type=float, default=None, help="dilation factor of the cyclic model")
    run.add_argument("--genus", type=int, default=None)
    run.add_argument("--element-cap", type=int, default=None)
    run.add_argument("--tau1", type=float, nargs=2, metavar=("RE", "IM"), default=None)

    export = sub.add_parser("export-octagon", help="write the fundamental polygon as SVG and generators as CSV")
    export.add_argument("--svg", required=True)
    export.add_argument("--csv", default=None)
    export.add_argument("--genus", type=int, default=2)

    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data: Dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {args.config}", {"reason": str(e)})
        if not isinstance(data, dict) or "suite" not in data:
            raise ConfigError("config file must be a JSON object with a 'suite' key")

    for key in OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if args.seeds is not None:
        data["seeds"] = args.seeds
    if args.tau1 is not None:
        data["tau1"] = tuple(args.tau1)

    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError("invalid run configuration", {"errors": json.loads(e.json())})


def run_command(args: argparse.Namespace) -> int:
    from pluriperiod.services.suite_service import run_suite

    config = load_config(args)
    settings.ELEMENT_CAP = config.element_cap
    settings.MAX_THREADS = config.threads

    report = run_suite(config)
    if not config.out:
        print(report.to_json())

    failed = [c.check_id for c in report.checks if not c.passed]
    logger.info("%d checks, %d failed", len(report.checks), len(failed))
    return EXIT_OK if report.passed else EXIT_FAILED


def export_command(args: argparse.Namespace) -> int:
    from pluriperiod.services.export_service import ExportService

    service = ExportService(args.genus)
    service.write_svg(args.svg)
    if args.csv:
        service.write_csv(args.csv)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.command == "run":
            return run_command(args)
        return export_command(args)
    except ConfigError as e:
        logger.error("%s", e.message)
        print(json.dumps(e.to_dict(), indent=2), file=sys.stderr)
        return EXIT_CONFIG
    except PluriperiodError as e:
        logger.error("%s", e.message)
        print(json.dumps(e.to_dict(), indent=2), file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
