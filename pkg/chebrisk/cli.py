"""Command-line interface: ``chebrisk <command> ...``."""

import argparse
import asyncio
import csv
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from moments import MomentInstability
from sos import (
    CertificateStore,
    IntervalSet,
    MissingCertificate,
    SolverFailure,
    complement,
    validate_certificate,
)

from .bounds import SWEEP_DEGREES, RiskEstimator, sweep_rows
from .config import Settings
from .errors import ProblemFileError, StageError
from .montecarlo import SampleConfig, mc_risk
from .problem import ProblemFile, ProblemValidator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_INSTABILITY = 4

DEFAULT_SWEEP_PROBLEM = Path(__file__).resolve().parent.parent / "problems" / "illustrative.json"


def _interval(text: str) -> tuple:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'l,u', got {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebrisk", description="Chebyshev-moment risk bounds for polynomial unsafe sets")
    parser.add_argument("--log-level", default=None, help="Logging level (default from CHEBRISK_LOG_LEVEL or INFO)")
    parser.add_argument("--cache", default=None, help="Certificate cache directory (overrides CHEBRISK_CACHE_DIR)")
    parser.add_argument("--env-file", default=None, help="Optional .env file to load settings from")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approximate", help="Solve and cache an indicator certificate")
    p.add_argument("--target", type=_interval, action="append", required=True, help="Target interval 'l,u' in [-1, 1]; repeatable")
    p.add_argument("--complement", action="store_true", help="Approximate the complement of the target in [-1, 1]")
    p.add_argument("--degree", type=int, default=20, help="Certificate degree (odd rounds up)")

    p = sub.add_parser("eval", help="Risk bounds for a problem file")
    p.add_argument("--problem", required=True, help="Problem JSON file")
    p.add_argument("--degree", type=int, default=None, help="Override the problem's degree")
    p.add_argument("--solve-missing", action="store_true", help="Solve certificates absent from the cache")
    p.add_argument("--auto-degree", action="store_true", help="Pick the degree from moment validity and the time budget")
    p.add_argument("--csv", default=None, help="Append a report row to this CSV file")

    p = sub.add_parser("mc", help="Monte-Carlo risk estimate for a problem file")
    p.add_argument("--problem", required=True, help="Problem JSON file")
    p.add_argument("--samples", type=int, default=None, help="Sample count")
    p.add_argument("--seed", type=int, default=None, help="Base seed")
    p.add_argument("--workers", type=int, default=None, help="Worker threads")
    p.add_argument("--csv", default=None, help="Append a report row to this CSV file")

    p = sub.add_parser("sweep", aliases=["table1"], help="Degree sweep of the illustrative problem next to the published values")
    p.add_argument("--problem", default=str(DEFAULT_SWEEP_PROBLEM), help="Problem JSON file")
    p.add_argument("--degrees", type=int, nargs="+", default=list(SWEEP_DEGREES), help="Degrees to evaluate")
    p.add_argument("--out", default=None, help="Write the rows to this CSV file")

    p = sub.add_parser("validate", help="Check problem files without solving anything")
    p.add_argument("problems", nargs="+", help="Problem JSON files")

    sub.add_parser("audit", help="Re-audit every cached certificate")
    return parser


def load_problem(path: str) -> ProblemFile:
    ok, message = ProblemValidator().validate_file(Path(path))
    if not ok:
        raise ProblemFileError(message)
    return ProblemFile.load(Path(path))


def write_rows(path: str, rows: Sequence[Dict[str, Any]], append: bool = True) -> None:
    if not rows:
        return
    target = Path(path)
    new_file = not append or not target.exists() or target.stat().st_size == 0
    with open(target, "a" if append else "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        if new_file:
            writer.writeheader()
        writer.writerows(rows)


RESIDUAL_KEYS = ("primal_inf", "dual_inf", "gap", "recon_residual", "grid_violation", "gram_min_eig")


def residual_lines(residuals: Dict[str, Any]) -> List[str]:
    """One 'name value' line per solver and audit residual present in ``residuals``."""
    return [f"{name:<15}{float(residuals[name]):.3e}" for name in RESIDUAL_KEYS if name in residuals]


async def cmd_approximate(args: argparse.Namespace, settings: Settings) -> int:
    start = time.perf_counter()
    target = IntervalSet.from_pairs(args.target)
    if args.complement:
        target = complement(target)
    estimator = RiskEstimator(settings)
    await estimator.initialize()
    key, cert = await estimator.certificate(target, args.degree, solve_missing=True)
    print(f"✓ Certificate for {target} at d={cert.degree}")
    print(f"  key:       {key}")
    print(f"  objective: {cert.objective_value:.8f}")
    print(f"  status:    {cert.solver_status} ({cert.iterations} iterations)")
    print(f"  solve:     {cert.solve_seconds:.3f}s, wall time {time.perf_counter() - start:.3f}s")
    print("  residuals:")
    for line in residual_lines(cert.residuals):
        print(f"    {line}")
    return EXIT_OK


async def cmd_eval(args: argparse.Namespace, settings: Settings) -> int:
    problem_file = load_problem(args.problem)
    problem = problem_file.to_risk_problem(args.degree)
    estimator = RiskEstimator(settings)
    await estimator.initialize()
    degree = args.degree
    if args.auto_degree:
        degree = await estimator.auto_degree(problem, solve_missing=args.solve_missing)
    bounds = await estimator.estimate(problem, degree, solve_missing=args.solve_missing)
    name = problem_file.name or Path(args.problem).stem
    print(f"✓ {name}: {bounds.p_l:.4f} <= P(unsafe) <= {bounds.p_u:.4f}")
    print(f"  degree used {bounds.degree_used} (requested {bounds.degree_requested}, moment validity {bounds.validity_degree})")
    if bounds.upper_only:
        print("  several constraints: only the upper bound is certified")
    if args.csv:
        write_rows(args.csv, [bounds.as_row(name)])
    return EXIT_OK


async def cmd_mc(args: argparse.Namespace, settings: Settings) -> int:
    problem_file = load_problem(args.problem)
    cfg = SampleConfig(
        n=args.samples or settings.mc_samples,
        seed=settings.mc_seed if args.seed is None else args.seed,
        ci_level=settings.mc_ci_level,
        workers=args.workers or settings.mc_workers,
    )
    result = await asyncio.to_thread(mc_risk, problem_file.to_risk_problem(), cfg)
    name = problem_file.name or Path(args.problem).stem
    print(f"✓ {name}: P(unsafe) ~ {result['estimate']:.5f} +/- {result['ci_halfwidth']:.5f} ({cfg.n} samples, seed {cfg.seed})")
    if args.csv:
        row = {"problem": name, "n": cfg.n, "seed": cfg.seed, "estimate": result["estimate"], "ci": result["ci_halfwidth"]}
        write_rows(args.csv, [row])
    return EXIT_OK


async def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    problem_file = load_problem(args.problem)
    estimator = RiskEstimator(settings)
    await estimator.initialize()
    rows = await sweep_rows(estimator, problem_file.to_risk_problem(), args.degrees)
    print(f"{'d':>4} {'p_u':>8} {'ref':>7} {'p_l':>8} {'ref':>7}")
    for row in rows:
        ref_u = "" if row["ref_p_u"] is None else f"{row['ref_p_u']:.3f}"
        ref_l = "" if row["ref_p_l"] is None else f"{row['ref_p_l']:.3f}"
        print(f"{row['d']:>4} {row['p_u']:>8.4f} {ref_u:>7} {row['p_l']:>8.4f} {ref_l:>7}")
    if args.out:
        write_rows(args.out, rows, append=False)
        print(f"✓ Rows written to {args.out}")
    return EXIT_OK


async def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    validator = ProblemValidator()
    code = EXIT_OK
    for path in args.problems:
        ok, message = validator.validate_file(Path(path))
        if ok:
            print(f"✓ {path}")
        else:
            print(f"✗ {path}: {message}")
            code = EXIT_INVALID
    return code


async def cmd_audit(args: argparse.Namespace, settings: Settings) -> int:
    store = CertificateStore(settings.cache_dir)
    await store.initialize()
    tolerances = settings.audit_tolerances()
    failed = 0
    total = 0
    async for cert in store.iter_certificates():
        total += 1
        report = validate_certificate(cert, tolerances.grid_n, tolerances)
        ok, message = report.is_valid()
        if ok:
            print(f"✓ {cert.target} d={cert.degree} (grid violation {report.grid_violation:.2e})")
        else:
            failed += 1
            print(f"✗ {cert.target} d={cert.degree}: {message}")
    print(f"{total - failed}/{total} certificates passed")
    return EXIT_SOLVER if failed else EXIT_OK


COMMANDS = {
    "approximate": cmd_approximate,
    "eval": cmd_eval,
    "mc": cmd_mc,
    "sweep": cmd_sweep,
    "table1": cmd_sweep,
    "validate": cmd_validate,
    "audit": cmd_audit,
}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, StageError):
        return exit_code_for(error.cause)
    if isinstance(error, MomentInstability):
        return EXIT_INSTABILITY
    if isinstance(error, SolverFailure):
        return EXIT_SOLVER
    if isinstance(error, (MissingCertificate, ValueError)):
        return EXIT_INVALID
    return 1


def solver_failure(error: BaseException) -> Optional[SolverFailure]:
    """The SolverFailure behind ``error``, unwrapping stage errors."""
    while isinstance(error, StageError):
        error = error.cause
    return error if isinstance(error, SolverFailure) else None


async def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        settings = Settings.from_env(args.env_file)
    except ValueError as e:
        print(f"✗ Invalid settings: {e}", file=sys.stderr)
        return EXIT_INVALID
    if args.cache:
        settings.cache_dir = args.cache
    level = (args.log_level or settings.log_level).upper()
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    try:
        return await COMMANDS[args.command](args, settings)
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            raise
        logger.error("%s failed: %s", args.command, e)
        print(f"✗ {e}", file=sys.stderr)
        failure = solver_failure(e)
        if failure is not None:
            print(f"  solver status: {failure.status}", file=sys.stderr)
            for line in residual_lines(failure.residuals):
                print(f"    {line}", file=sys.stderr)
        return code


def run() -> None:
    sys.exit(asyncio.run(main()))
