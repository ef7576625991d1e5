#!/usr/bin/env python3
"""Solve and cache the indicator certificates the shipped problems need."""

import argparse
import asyncio
import sys
from pathlib import Path

# Add parent directory to path
sys.path.append(str(Path(__file__).parent.parent))

from chebrisk import ProblemFile, RiskEstimator, Settings  # noqa: E402
from polynomials import rescale_constraint  # noqa: E402
from sos import IntervalSet, complement  # noqa: E402

PROBLEMS_DIR = Path(__file__).parent.parent / "problems"


def targets_for(problem_file: ProblemFile, settings: Settings) -> list:
    """Target sets on [-1, 1] for every constraint of ``problem_file`` after rescaling."""
    problem = problem_file.to_risk_problem()
    box = problem.support_box()
    targets = []
    for c in problem.constraints:
        r = rescale_constraint(c.poly, c.lower, c.upper, box, settings.bound_method)
        targets.append(IntervalSet.single(r.lower, r.upper))
    if problem.ell == 1:
        targets.append(complement(targets[0]))
    return targets


async def main():
    """Warm the certificate cache."""
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("problems", nargs="*", help="Problem files (default: every shipped problem)")
    parser.add_argument("--degrees", type=int, nargs="+", default=None, help="Degrees to solve (default: each problem's own)")
    args = parser.parse_args()

    settings = Settings.from_env()
    estimator = RiskEstimator(settings)
    await estimator.initialize()

    paths = [Path(p) for p in args.problems] or sorted(PROBLEMS_DIR.glob("*.json"))
    print(f"Warming certificate cache in {settings.cache_dir}...")

    failed = 0
    for path in paths:
        problem_file = ProblemFile.load(path)
        degrees = args.degrees or [problem_file.degree]
        for target in targets_for(problem_file, settings):
            for d in degrees:
                try:
                    key, cert = await estimator.certificate(target, d, solve_missing=True)
                    print(f"✓ {path.stem}: {target} d={cert.degree} objective {cert.objective_value:.6f} ({key[:12]})")
                except Exception as e:
                    failed += 1
                    print(f"✗ {path.stem}: {target} d={d}: {e}")

    store = estimator.store
    print(f"\n{store.misses} solved, {store.hits} already cached, {failed} failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
