"""Command line front end: ``randers-curvature {eval,verify,identity,zoo}``.

Exit codes: 0 when every asserted check passes, 1 when one fails, 2 on
errors (bad files, inadmissible points, bad arguments).
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import shlex
import sys
import time
from collections.abc import Sequence

import numpy as np
from awesomeversion import AwesomeVersion
from awesomeversion.exceptions import (
    AwesomeVersionCompareException,
    AwesomeVersionStrategyException,
)

from . import __version__
from .config import Settings, load_settings, with_overrides
from .const import (
    FIT,
    NUMPY_REQUIRED_VERSION,
    ConfDefaultInt,
    ExitCode,
    Identity,
    Theorem,
)
from .exceptions import (
    DependencyVersionError,
    InadmissiblePoint,
    InvalidArgument,
    RandersCurvatureException,
)
from .expr import parse
from .helpers import format_value, parse_vector
from .metric import MetricSpec, load_metric_spec
from .randers import QUANTITIES, async_check_identity, async_verify, evaluate_quantity
from .report import VerificationReport, build_document, write_csv, write_report
from .sampling import draw_samples
from .zoo import async_run_all, catalogue, catalogue_entry, export_catalogue, random_randers

_LOGGER = logging.getLogger(__name__)

ZOO_PREFIX = "zoo:"
RANDOM_PREFIX = "random:"

# The tolerance --tol replaces for each check.
PRIMARY_TOLERANCE = {
    Theorem.ISOTROPIC: "identity",
    Theorem.FLAT: "identity",
    Theorem.REVERSIBLE: "identity",
    Theorem.SQUARE: "square",
    Identity.EQ7: "identity",
    Identity.EPOLY: "identity",
    Identity.NPOLY: "identity",
    Identity.HOMOGENEITY: "homogeneity",
    Identity.S_TWO_PATH: "two_path",
}


def check_dependencies() -> None:
    """Refuse to run on a numpy whose PCG64 stream predates the pinned one."""
    try:
        too_old = AwesomeVersion(np.__version__) < AwesomeVersion(NUMPY_REQUIRED_VERSION)
    except (AwesomeVersionCompareException, AwesomeVersionStrategyException) as e:
        _LOGGER.warning(f"Cannot compare numpy version {np.__version__}: {e}")
        return
    if too_old:
        raise DependencyVersionError(
            f"numpy {np.__version__} is installed, {NUMPY_REQUIRED_VERSION} or newer is required"
        )


def resolve_spec(value: str) -> MetricSpec:
    """A metric spec file path, ``zoo:<name>`` or ``random:<seed>[,n[,degree[,amplitude]]]``."""
    if value.startswith(ZOO_PREFIX):
        return catalogue_entry(value.removeprefix(ZOO_PREFIX)).spec

    if value.startswith(RANDOM_PREFIX):
        parts = value.removeprefix(RANDOM_PREFIX).split(",")
        try:
            seed = int(parts[0])
            n = int(parts[1]) if len(parts) > 1 else 2
            degree = int(parts[2]) if len(parts) > 2 else 2
            amplitude = float(parts[3]) if len(parts) > 3 else 0.05
        except ValueError:
            raise InvalidArgument(f"invalid random spec '{value}'")
        return random_randers(seed, n, degree, amplitude)

    return load_metric_spec(value)


def _c_argument(value: str | None, spec: MetricSpec):
    if value is None:
        return None
    if value == FIT:
        return FIT
    try:
        return float(value)
    except ValueError:
        return parse(value, spec.dimension)


def _settings(args: argparse.Namespace, check: str) -> Settings:
    settings = load_settings(args.config)
    tolerances = {PRIMARY_TOLERANCE[check]: args.tol} if args.tol is not None else None
    return with_overrides(
        settings,
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
        timeout=args.timeout,
        tolerances=tolerances,
    )


def _print_report(report: VerificationReport) -> None:
    print(f"{report.target} on {report.spec_name}: {len(report.records)} samples")
    for condition in report.conditions.values():
        tag = " (informational)" if condition.informational else ""
        verdict = "pass" if condition.passed else "fail"
        print(
            f"  {condition.name}: max residual {format_value(condition.max_residual)} "
            f"tol {condition.tolerance:g} {verdict}{tag}"
        )
    for key, value in report.extras.items():
        print(f"  {key} = {value if isinstance(value, str) else format_value(value)}")
    if report.skipped:
        print(f"  skipped {len(report.skipped)} inadmissible samples")
    print(f"verdict: {'pass' if report.passed else 'fail'}")


def _emit(
    report: VerificationReport,
    args: argparse.Namespace,
    settings: Settings,
    runtime: float,
) -> int:
    _print_report(report)
    document = build_document(
        report,
        command=shlex.join(args.argv),
        settings=settings,
        runtime_seconds=runtime,
    )
    if args.report:
        write_report(document, args.report)
    if args.csv:
        write_csv(document, args.csv)
    return ExitCode.PASS if report.passed else ExitCode.FAIL


def cmd_eval(args: argparse.Namespace) -> int:
    spec = resolve_spec(args.spec)
    x = parse_vector(args.x, spec.dimension)
    y = parse_vector(args.y, spec.dimension)
    names = [name for group in args.quantities for name in group.split(",") if name]

    try:
        spec.check_admissible(x)
        values = {name: evaluate_quantity(name, spec, x, y) for name in names}
    except InadmissiblePoint as e:
        a, b = spec.coefficients(x)
        norm = float(np.sqrt(b @ np.linalg.solve(a, b))) if np.all(np.isfinite(a)) else float("nan")
        _LOGGER.error(
            f"Inadmissible point x={format_value(x)}: {e}; "
            f"a(x)={format_value(a)}, b(x)={format_value(b)}, |b|={format_value(norm)}"
        )
        return ExitCode.ERROR

    for name, value in values.items():
        print(f"{name} = {format_value(value)}")
    return ExitCode.PASS


async def _async_verify(args: argparse.Namespace) -> int:
    spec = resolve_spec(args.spec)
    settings = _settings(args, args.theorem)
    samples = draw_samples(spec, settings.samples, settings.seed)
    start = time.perf_counter()
    report = await async_verify(
        spec,
        args.theorem,
        samples,
        c=_c_argument(args.c, spec),
        tolerances=settings.tolerances,
        workers=settings.workers,
        timeout=settings.timeout,
    )
    return _emit(report, args, settings, time.perf_counter() - start)


async def _async_identity(args: argparse.Namespace) -> int:
    spec = resolve_spec(args.spec)
    settings = _settings(args, args.identity)
    samples = draw_samples(spec, settings.samples, settings.seed)
    start = time.perf_counter()
    report = await async_check_identity(
        spec,
        args.identity,
        samples,
        c=args.c,
        seed=settings.seed,
        tolerances=settings.tolerances,
        workers=settings.workers,
        timeout=settings.timeout,
    )
    return _emit(report, args, settings, time.perf_counter() - start)


async def _async_zoo(args: argparse.Namespace) -> int:
    if args.list:
        for entry in catalogue():
            print(f"{entry.name}: {entry.notes}")
        return ExitCode.PASS

    if args.export:
        for path in export_catalogue(args.export):
            print(path)
        return ExitCode.PASS

    settings = load_settings(args.config)
    outcomes = await async_run_all(
        samples=args.samples or ConfDefaultInt.ZOO_SAMPLES,
        seed=settings.seed,
        tolerances=settings.tolerances,
        workers=settings.workers,
    )
    width = max(len(o.entry) for o in outcomes)
    check_width = max(len(o.check) for o in outcomes)
    for o in outcomes:
        status = "ok" if o.matches else "MISMATCH"
        expected = "pass" if o.expected else "fail"
        observed = "pass" if o.observed else "fail"
        print(
            f"{o.entry:<{width}}  {o.check:<{check_width}} "
            f"expected {expected} got {observed}  {status}  {o.detail}"
        )

    mismatches = sum(not o.matches for o in outcomes)
    print(f"{len(outcomes) - mismatches} of {len(outcomes)} documented verdicts reproduced")
    return ExitCode.PASS if mismatches == 0 else ExitCode.FAIL


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, help=f"sample count (default {ConfDefaultInt.SAMPLES})")
    parser.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    parser.add_argument("--tol", type=float, help="tolerance of the asserted conditions")
    parser.add_argument("--workers", type=int, help="worker threads (default 1)")
    parser.add_argument("--timeout", type=float, help="run time budget in seconds")
    parser.add_argument("--report", help="write the JSON report here")
    parser.add_argument("--csv", help="write a CSV export of the sample records here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randers-curvature",
        description="Curvature of Randers metrics and numerical checks of their characterizations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--config", help="JSON settings file")
    sub = parser.add_subparsers(dest="command", required=True)

    spec_help = "metric spec file, zoo:<name> or random:<seed>[,n[,degree[,amplitude]]]"

    p_eval = sub.add_parser("eval", help="evaluate quantities at one point")
    p_eval.add_argument("spec", help=spec_help)
    p_eval.add_argument("--x", required=True, help="point, e.g. 0.3,0")
    p_eval.add_argument("--y", required=True, help="direction, e.g. 1,0")
    p_eval.add_argument(
        "quantities", nargs="+", help=f"quantities (comma separated allowed): {', '.join(QUANTITIES)}"
    )

    p_verify = sub.add_parser("verify", help="check a characterization on samples")
    p_verify.add_argument("spec", help=spec_help)
    p_verify.add_argument("theorem", choices=[t.value for t in Theorem])
    p_verify.add_argument("--c", help="isotropy factor: a number, an expression in x, or 'fit'")
    _add_run_options(p_verify)

    p_identity = sub.add_parser("identity", help="run a cross-check identity on samples")
    p_identity.add_argument("spec", help=spec_help)
    p_identity.add_argument("identity", choices=[i.value for i in Identity])
    p_identity.add_argument("--c", type=float, help="fixed c for epoly (default: random per sample)")
    _add_run_options(p_identity)

    p_zoo = sub.add_parser("zoo", help="built-in metric catalogue")
    group = p_zoo.add_mutually_exclusive_group(required=True)
    group.add_argument("--export", metavar="DIR", help="write every entry as a metric spec file")
    group.add_argument("--run-all", action="store_true", help="reproduce every documented verdict")
    group.add_argument("--list", action="store_true", help="list the entries")
    p_zoo.add_argument(
        "--samples", type=int, help=f"samples per check (default {ConfDefaultInt.ZOO_SAMPLES})"
    )

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        check_dependencies()
        match args.command:
            case "eval":
                return int(cmd_eval(args))
            case "verify":
                return int(asyncio.run(_async_verify(args)))
            case "identity":
                return int(asyncio.run(_async_identity(args)))
            case "zoo":
                return int(asyncio.run(_async_zoo(args)))
    except RandersCurvatureException as e:
        _LOGGER.error(f"{e}")
    except OSError as e:
        _LOGGER.error(f"I/O error: {e}")
    return int(ExitCode.ERROR)
