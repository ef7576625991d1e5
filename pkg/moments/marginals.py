"""Marginal distributions of the uncertain variables and their raw moments.

Every marginal is supported inside [-1, 1]. Raw moments are computed lazily
to the highest order requested so far and shared through a lock-guarded
module cache keyed by the marginal's canonical JSON.
"""

import logging
import threading
from typing import Annotated, Any, Dict, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator
from scipy.linalg import cholesky, eigh_tridiagonal
from scipy.special import betaln, comb, roots_jacobi, roots_legendre

from .errors import InsufficientMoments

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 5000
SUPPORT_TOL = 1e-12

_MOMENT_CACHE: Dict[str, np.ndarray] = {}
_CACHE_LOCK = threading.Lock()


def _check_interval(a: float, b: float) -> None:
    if not a < b:
        raise ValueError(f"support [{a}, {b}] must have a < b")
    if a < -1.0 - SUPPORT_TOL or b > 1.0 + SUPPORT_TOL:
        raise ValueError(f"support [{a}, {b}] must lie inside [-1, 1]")


def affine_moments(base: np.ndarray, a: float, b: float) -> np.ndarray:
    """Moments of a + (b - a) U from the moments of U (binomial expansion)."""
    base = np.asarray(base, dtype=float)
    if base.size == 0 or abs(base[0] - 1.0) > 1e-12:
        raise ValueError("base moments must start with m_0 = 1")
    h = b - a
    out = np.empty_like(base)
    for k in range(base.size):
        j = np.arange(k + 1)
        out[k] = np.sum(comb(k, j) * np.power(a, k - j) * np.power(h, j) * base[: k + 1])
    return out


def beta_moment_gamma(alpha: float, beta: float, k: int) -> float:
    """E[U^k] for U ~ Beta(alpha, beta) on [0, 1] from the Beta-function ratio."""
    return float(np.exp(betaln(alpha + k, beta) - betaln(alpha, beta)))


class BaseMarginal(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def support(self) -> Tuple[float, float]:
        raise NotImplementedError

    def cache_key(self) -> str:
        return self.model_dump_json()

    def _compute_moments(self, k_max: int) -> np.ndarray:
        raise NotImplementedError

    def moments(self, k_max: int) -> np.ndarray:
        """Raw moments m_0..m_{k_max} as a read-only array."""
        if k_max < 0:
            raise ValueError("moment order must be non-negative")
        if k_max > MAX_MOMENT_ORDER:
            raise ValueError(f"moment order {k_max} exceeds cap {MAX_MOMENT_ORDER}")
        key = self.cache_key()
        with _CACHE_LOCK:
            cached = _MOMENT_CACHE.get(key)
        if cached is None or cached.size <= k_max:
            values = self._compute_moments(k_max)
            values.setflags(write=False)
            with _CACHE_LOCK:
                current = _MOMENT_CACHE.get(key)
                if current is None or current.size < values.size:
                    _MOMENT_CACHE[key] = values
            cached = values
        return cached[: k_max + 1]

    def raw_moment(self, k: int) -> float:
        return float(self.moments(k)[k])

    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights integrating polynomials of degree <= 2n - 1 exactly."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


class UniformMarginal(BaseMarginal):
    """Uniform law on [a, b]."""

    dist: Literal["uniform"] = "uniform"
    a: float
    b: float

    @model_validator(mode="after")
    def _check_support(self) -> "UniformMarginal":
        _check_interval(self.a, self.b)
        return self

    def support(self) -> Tuple[float, float]:
        return self.a, self.b

    def _compute_moments(self, k_max: int) -> np.ndarray:
        k = np.arange(k_max + 1, dtype=float)
        return (np.power(self.b, k + 1) - np.power(self.a, k + 1)) / ((k + 1) * (self.b - self.a))

    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        x, w = roots_legendre(n)
        c, h = 0.5 * (self.a + self.b), 0.5 * (self.b - self.a)
        return c + h * x, 0.5 * w

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.a, self.b, size)


class BetaMarginal(BaseMarginal):
    """Beta(alpha, beta) law stretched onto [a, b] (default [0, 1])."""

    dist: Literal["beta"] = "beta"
    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    a: float = 0.0
    b: float = 1.0

    @model_validator(mode="after")
    def _check_support(self) -> "BetaMarginal":
        _check_interval(self.a, self.b)
        return self

    @property
    def support_assumed(self) -> bool:
        """True when the support was not given and [0, 1] was assumed."""
        return not {"a", "b"} & self.model_fields_set

    def support(self) -> Tuple[float, float]:
        return self.a, self.b

    def unit_moments(self, k_max: int) -> np.ndarray:
        """Moments on [0, 1] by m_k = (alpha + k - 1) / (alpha + beta + k - 1) m_{k-1}."""
        k = np.arange(1, k_max + 1, dtype=float)
        ratios = (self.alpha + k - 1.0) / (self.alpha + self.beta + k - 1.0)
        return np.concatenate([[1.0], np.cumprod(ratios)])

    def _compute_moments(self, k_max: int) -> np.ndarray:
        if self.a == 0.0 and self.b == 1.0:
            return self.unit_moments(k_max)
        if self.a >= 0.0:
            return affine_moments(self.unit_moments(k_max), self.a, self.b)
        # alternating binomial terms cancel badly once a < 0
        x, w = self.quadrature(k_max // 2 + 1)
        return np.power.outer(x, np.arange(k_max + 1)).T @ w

    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        x, w = roots_jacobi(n, self.beta - 1.0, self.alpha - 1.0)
        t = 0.5 * (1.0 + x)
        return self.a + (self.b - self.a) * t, w / w.sum()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # numpy draws Beta via Johnk's method for small parameters, gamma ratios otherwise
        return self.a + (self.b - self.a) * rng.beta(self.alpha, self.beta, size)


class PointMarginal(BaseMarginal):
    """Degenerate law at v."""

    dist: Literal["point"] = "point"
    v: float

    @field_validator("v")
    @classmethod
    def _check_value(cls, v: float) -> float:
        if abs(v) > 1.0 + SUPPORT_TOL:
            raise ValueError(f"point mass {v} must lie inside [-1, 1]")
        return v

    def support(self) -> Tuple[float, float]:
        return self.v, self.v

    def _compute_moments(self, k_max: int) -> np.ndarray:
        return np.power(self.v, np.arange(k_max + 1, dtype=float))

    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        return np.array([self.v]), np.array([1.0])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.v)


class MomentsMarginal(BaseMarginal):
    """A law known only through an explicit raw-moment table, assumed supported in [-1, 1]."""

    dist: Literal["moments"] = "moments"
    values: List[float]

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: List[float]) -> List[float]:
        if not values or abs(values[0] - 1.0) > 1e-12:
            raise ValueError("explicit moments must start with m_0 = 1")
        if any(abs(m) > 1.0 + 1e-9 for m in values):
            raise ValueError("explicit moments of a law on [-1, 1] must satisfy |m_k| <= 1")
        return values

    def support(self) -> Tuple[float, float]:
        return -1.0, 1.0

    def _compute_moments(self, k_max: int) -> np.ndarray:
        if k_max >= len(self.values):
            raise InsufficientMoments(k_max, len(self.values))
        return np.array(self.values, dtype=float)

    def quadrature(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        # Golub-Welsch on the Cholesky factor of the Hankel moment matrix
        m = self.moments(2 * n)
        hankel = np.array([[m[i + j] for j in range(n + 1)] for i in range(n + 1)])
        try:
            r = cholesky(hankel, lower=False)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"moment table does not admit a {n}-point Gauss rule") from exc
        alpha = np.empty(n)
        for j in range(n):
            alpha[j] = r[j, j + 1] / r[j, j] - (r[j - 1, j] / r[j - 1, j - 1] if j else 0.0)
        off = np.array([r[j + 1, j + 1] / r[j, j] for j in range(n - 1)])
        nodes, vecs = eigh_tridiagonal(alpha, off)
        return nodes, m[0] * vecs[0, :] ** 2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise ValueError("a marginal given only by its moments cannot be sampled")


Marginal = Annotated[
    Union[UniformMarginal, BetaMarginal, PointMarginal, MomentsMarginal],
    Field(discriminator="dist"),
]

_MARGINAL_ADAPTER: TypeAdapter = TypeAdapter(Marginal)


def parse_marginal(data: Dict[str, Any]) -> BaseMarginal:
    """Build a marginal from its problem-file descriptor, e.g. ``{"dist": "uniform", "a": -0.5, "b": 0.5}``."""
    return _MARGINAL_ADAPTER.validate_python(data)


def raw_moment(dist: BaseMarginal, k: int) -> float:
    """E[X^k] under ``dist``."""
    if k < 0:
        raise ValueError("moment order must be non-negative")
    return dist.raw_moment(k)


def clear_moment_cache() -> None:
    with _CACHE_LOCK:
        _MOMENT_CACHE.clear()
