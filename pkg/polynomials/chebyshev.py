"""Univariate Chebyshev series on [-1, 1]."""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DegreeCapExceeded

logger = logging.getLogger(__name__)

MAX_UNIVARIATE_DEGREE = 200


@dataclass(frozen=True, eq=False)
class ChebSeries:
    """Polynomial sum_k coeffs[k] * T_k(z).

    Trailing zeros may be stored; ``degree`` ignores them.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=float).ravel()
        if arr.size == 0:
            arr = np.zeros(1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("Chebyshev coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def basis(cls, k: int) -> "ChebSeries":
        """The single polynomial T_k."""
        coeffs = np.zeros(k + 1)
        coeffs[k] = 1.0
        return cls(coeffs)

    @classmethod
    def from_standard(cls, coeffs: Sequence[float]) -> "ChebSeries":
        return standard_to_cheb(coeffs)

    def to_standard(self) -> np.ndarray:
        return cheb_to_standard(self)

    @property
    def degree(self) -> int:
        nonzero = np.flatnonzero(self.coeffs)
        return int(nonzero[-1]) if nonzero.size else 0

    def trim(self) -> "ChebSeries":
        return ChebSeries(self.coeffs[: self.degree + 1])

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, self.coeffs.size))
        out[: self.coeffs.size] = self.coeffs
        return out[:length]

    def __call__(self, z: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return cheb_eval(self, z)

    def add(self, other: "ChebSeries") -> "ChebSeries":
        return ChebSeries(C.chebadd(self.coeffs, other.coeffs))

    def sub(self, other: "ChebSeries") -> "ChebSeries":
        return ChebSeries(C.chebsub(self.coeffs, other.coeffs))

    def scale(self, factor: float) -> "ChebSeries":
        return ChebSeries(self.coeffs * float(factor))

    __add__ = add
    __sub__ = sub

    def __mul__(self, other: Union["ChebSeries", float]) -> "ChebSeries":
        if isinstance(other, ChebSeries):
            return cheb_mul(self, other)
        return self.scale(other)

    def allclose(self, other: "ChebSeries", atol: float = 1e-12) -> bool:
        n = max(self.coeffs.size, other.coeffs.size)
        return bool(np.allclose(self.padded(n), other.padded(n), rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"ChebSeries(degree={self.degree}, coeffs={np.array2string(self.coeffs[:6], precision=4)}...)"


def _check_degree(degree: int, cap: int = MAX_UNIVARIATE_DEGREE) -> None:
    if degree > cap:
        raise DegreeCapExceeded(degree, cap)


def cheb_mul(a: ChebSeries, b: ChebSeries) -> ChebSeries:
    """Product linearised by T_m T_n = (T_{m+n} + T_{|m-n|}) / 2."""
    _check_degree(a.degree + b.degree)
    return ChebSeries(C.chebmul(a.trim().coeffs, b.trim().coeffs))


def cheb_eval(a: ChebSeries, z: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Clenshaw evaluation of the series."""
    zz = np.asarray(z, dtype=float)
    if np.any(np.abs(zz) > 1.0 + 1e-12):
        logger.warning("Chebyshev series evaluated outside [-1, 1] (max |z| = %.6g)", float(np.max(np.abs(zz))))
    out = C.chebval(zz, a.coeffs)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=64)
def _integral_weights(n: int) -> np.ndarray:
    k = np.arange(n)
    w = np.zeros(n)
    even = k % 2 == 0
    w[even] = 2.0 / (1.0 - k[even].astype(float) ** 2)
    w.setflags(write=False)
    return w


def cheb_integral_weights(n: int) -> np.ndarray:
    """Weights w_k = int_{-1}^{1} T_k(z) dz for k < n."""
    return _integral_weights(int(n))


def cheb_integral(a: ChebSeries) -> float:
    """Integral of the series over [-1, 1]."""
    return float(cheb_integral_weights(a.coeffs.size) @ a.coeffs)


def standard_to_cheb(coeffs: Sequence[float]) -> ChebSeries:
    """Monomial coefficients (c_0 + c_1 z + ...) to a Chebyshev series."""
    arr = np.asarray(coeffs, dtype=float)
    _check_degree(arr.size - 1)
    return ChebSeries(C.poly2cheb(arr) if arr.size else np.zeros(1))


def cheb_to_standard(series: ChebSeries) -> np.ndarray:
    """Chebyshev series back to monomial coefficients."""
    return np.asarray(C.cheb2poly(series.coeffs), dtype=float)


@lru_cache(maxsize=16)
def _chebyshev_monomial_matrix(n: int) -> np.ndarray:
    # Row k holds the monomial coefficients of T_k.
    mat = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        row = C.cheb2poly(ChebSeries.basis(k).coeffs)
        mat[k, : row.size] = row
    mat.setflags(write=False)
    return mat


def moments_standard_to_cheb(moments: Sequence[float]) -> np.ndarray:
    """Map raw moments E[z^j] to Chebyshev moments E[T_k(z)].

    The matrix entries grow like 3^k, so this loses accuracy at high order.
    """
    m = np.asarray(moments, dtype=float)
    _check_degree(m.size - 1)
    return _chebyshev_monomial_matrix(m.size - 1) @ m


def moments_cheb_to_standard(cheb_moments: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`moments_standard_to_cheb`."""
    t = np.asarray(cheb_moments, dtype=float)
    _check_degree(t.size - 1)
    mat = _chebyshev_monomial_matrix(t.size - 1)
    return np.linalg.solve(mat, t)


def cheb_linear_factor_matrix(factor: ChebSeries, n: int) -> np.ndarray:
    """Matrix of the linear map s -> factor * s on series of degree <= n.

    Column j is the Chebyshev coefficient vector of factor * T_j.
    """
    g = factor.trim()
    rows = n + g.degree + 1
    _check_degree(rows - 1)
    mat = np.zeros((rows, n + 1))
    for j in range(n + 1):
        col = C.chebmul(g.coeffs, ChebSeries.basis(j).coeffs)
        mat[: col.size, j] = col
    return mat


@lru_cache(maxsize=64)
def _gram_maps(size: int) -> np.ndarray:
    j, k = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    maps = np.stack(
        [0.5 * ((j + k == i).astype(float) + (np.abs(j - k) == i).astype(float)) for i in range(2 * size - 1)]
    )
    maps.setflags(write=False)
    return maps


def gram_to_cheb_maps(size: int) -> np.ndarray:
    """Stack E_i with <E_i, Q> = coefficient of T_i in v(z)^T Q v(z).

    v = (T_0, ..., T_{size-1}); the result has shape (2*size - 1, size, size).
    """
    return _gram_maps(int(size))
