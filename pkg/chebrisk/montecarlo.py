"""Monte-Carlo estimate of the risk, used as ground truth in validation.

Work is cut into fixed-size chunks. Each chunk draws from its own generator
spawned from ``SeedSequence(seed)``, so the estimate depends only on the
seed and the sample count, never on how many workers ran the chunks.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import norm

from moments import BaseMarginal
from polynomials import MultiPoly, VariableMismatch

from .bounds import RiskProblem
from .config import DEFAULT_SEED

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 100_000


class SampleConfig(BaseModel):
    n: int = Field(default=1_000_000, ge=1)
    seed: int = DEFAULT_SEED
    ci_level: float = Field(default=0.99, gt=0.0, lt=1.0)
    workers: int = Field(default=1, ge=1)
    chunk: int = Field(default=DEFAULT_CHUNK, ge=1)

    def chunk_sizes(self) -> List[int]:
        full, rest = divmod(self.n, self.chunk)
        return [self.chunk] * full + ([rest] if rest else [])


def sample(dist: BaseMarginal, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """``size`` independent draws from ``dist``.

    Uniform draws come from ``Generator.uniform`` and Beta draws from
    ``Generator.beta`` (gamma ratio), stretched onto the support.
    """
    return dist.sample(rng, size)


def wilson_interval(p_hat: float, n: int, ci_level: float = 0.99) -> Tuple[float, float]:
    """Wilson score interval for a proportion observed in ``n`` trials."""
    if n <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 * (1.0 + ci_level)))
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _draw(margins: Sequence[BaseMarginal], rng: np.random.Generator, size: int) -> np.ndarray:
    return np.column_stack([sample(dist, rng, size) for dist in margins])


def _run_chunks(cfg: SampleConfig, work) -> list:
    sizes = cfg.chunk_sizes()
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = list(zip(seeds, sizes))
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda job: work(np.random.default_rng(job[0]), job[1]), jobs))
    return [work(np.random.default_rng(seed), size) for seed, size in jobs]


def mc_risk(problem: RiskProblem, cfg: SampleConfig = SampleConfig()) -> Dict[str, float]:
    """Fraction of samples inside the unsafe set, with its Wilson half-width.

    Membership is tested on the unscaled constraints with closed intervals.
    """

    def count(rng: np.random.Generator, size: int) -> int:
        return int(np.count_nonzero(problem.contains(_draw(problem.margins, rng, size))))

    hits = sum(_run_chunks(cfg, count))
    estimate = hits / cfg.n
    lo, hi = wilson_interval(estimate, cfg.n, cfg.ci_level)
    logger.info("Monte Carlo risk %.5f from %d samples (seed %d)", estimate, cfg.n, cfg.seed)
    return {
        "estimate": estimate,
        "ci_halfwidth": 0.5 * (hi - lo),
        "ci_low": lo,
        "ci_high": hi,
        "n": cfg.n,
        "seed": cfg.seed,
    }


def mc_moments(
    p: MultiPoly, margins: Sequence[BaseMarginal], k_max: int, cfg: SampleConfig = SampleConfig()
) -> Dict[str, np.ndarray]:
    """Sample raw moments E[z^k], k = 0..k_max, of z = p(y) and their standard errors."""
    if p.nvars != len(margins):
        raise VariableMismatch(p.nvars, len(margins))
    if k_max < 0:
        raise ValueError("moment order must be non-negative")
    powers = np.arange(k_max + 1)

    def sums(rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
        z = p.evaluate(_draw(margins, rng, size))
        zk = np.power.outer(z, powers)
        return zk.sum(axis=0), (zk * zk).sum(axis=0)

    parts = _run_chunks(cfg, sums)
    s1 = np.sum([a for a, _ in parts], axis=0)
    s2 = np.sum([b for _, b in parts], axis=0)
    mean = s1 / cfg.n
    var = np.maximum(s2 / cfg.n - mean * mean, 0.0)
    stderr = np.sqrt(var / cfg.n)
    return {"mean": mean, "stderr": stderr}
