"""Sparse multivariate polynomials in the standard monomial basis."""

import logging
from itertools import product
from math import comb
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import DegreeCapExceeded, VariableMismatch

logger = logging.getLogger(__name__)

# Coefficients below this are floating-point dust and get dropped.
DROP_TOL = 1e-14
MAX_TOTAL_DEGREE = 64


def grlex_order(exponents: np.ndarray) -> np.ndarray:
    """Return the permutation sorting exponent rows in graded-lex order."""
    if exponents.shape[0] == 0:
        return np.arange(0)
    keys = [exponents[:, v] for v in range(exponents.shape[1] - 1, -1, -1)]
    keys.append(exponents.sum(axis=1))
    return np.lexsort(keys)


def term_capacity(nvars: int, degree: int) -> int:
    """Number of monomials of total degree <= degree, S_{n,d} = binom(d+n, n)."""
    return comb(degree + nvars, nvars)


class MultiPoly:
    """Immutable sparse polynomial over ``nvars`` variables.

    Terms are stored as a dense (T, nvars) exponent array and a (T,)
    coefficient array, sorted in graded-lex order with duplicates merged and
    zero coefficients removed.
    """

    __slots__ = ("nvars", "_exps", "_coeffs")

    def __init__(
        self,
        nvars: int,
        exponents: Optional[np.ndarray] = None,
        coeffs: Optional[np.ndarray] = None,
    ):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        self.nvars = int(nvars)

        if exponents is None or coeffs is None or len(coeffs) == 0:
            exps = np.zeros((0, self.nvars), dtype=np.int64)
            vals = np.zeros(0, dtype=float)
        else:
            exps = np.asarray(exponents, dtype=np.int64).reshape(-1, self.nvars)
            vals = np.asarray(coeffs, dtype=float).ravel()
            if exps.shape[0] != vals.shape[0]:
                raise ValueError("exponent rows and coefficients differ in length")
            if np.any(exps < 0):
                raise ValueError("exponents must be non-negative")
            exps, vals = self._canonical(exps, vals)

        exps.setflags(write=False)
        vals.setflags(write=False)
        self._exps = exps
        self._coeffs = vals

    @staticmethod
    def _canonical(exps: np.ndarray, vals: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        unique, inverse = np.unique(exps, axis=0, return_inverse=True)
        merged = np.bincount(inverse.ravel(), weights=vals, minlength=unique.shape[0])
        keep = np.abs(merged) >= DROP_TOL
        unique, merged = unique[keep], merged[keep]
        order = grlex_order(unique)
        return np.ascontiguousarray(unique[order]), np.ascontiguousarray(merged[order])

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "MultiPoly":
        return cls(nvars, np.zeros((1, nvars), dtype=np.int64), np.array([float(value)]))

    @classmethod
    def variable(cls, nvars: int, index: int, coeff: float = 1.0) -> "MultiPoly":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = np.zeros((1, nvars), dtype=np.int64)
        exps[0, index] = 1
        return cls(nvars, exps, np.array([float(coeff)]))

    @classmethod
    def from_terms(
        cls, nvars: int, terms: Iterable[Tuple[Sequence[int], float]]
    ) -> "MultiPoly":
        """Build from ``(exponents, coeff)`` pairs; a mapping's ``items()`` works too."""
        if isinstance(terms, Mapping):
            terms = terms.items()
        rows: List[Sequence[int]] = []
        vals: List[float] = []
        for exps, coeff in terms:
            if len(exps) != nvars:
                raise VariableMismatch(len(exps), nvars)
            rows.append(tuple(int(e) for e in exps))
            vals.append(float(coeff))
        if not rows:
            return cls(nvars)
        return cls(nvars, np.array(rows, dtype=np.int64), np.array(vals))

    @classmethod
    def from_records(cls, nvars: int, records: Iterable[Dict[str, Any]]) -> "MultiPoly":
        """Parse the problem-file term list ``[{exponents: [...], coeff: ...}]``."""
        return cls.from_terms(nvars, ((r["exponents"], r["coeff"]) for r in records))

    def to_records(self) -> List[Dict[str, Any]]:
        return [
            {"exponents": [int(e) for e in row], "coeff": float(c)}
            for row, c in zip(self._exps, self._coeffs)
        ]

    # -- queries ----------------------------------------------------------

    @property
    def exponents(self) -> np.ndarray:
        return self._exps

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def terms(self) -> Dict[Tuple[int, ...], float]:
        """Terms as an insertion-ordered (graded-lex) dict."""
        return {tuple(int(e) for e in row): float(c) for row, c in zip(self._exps, self._coeffs)}

    def __len__(self) -> int:
        return int(self._coeffs.shape[0])

    def __iter__(self) -> Iterator[Tuple[Tuple[int, ...], float]]:
        return iter(self.terms().items())

    @property
    def is_zero(self) -> bool:
        return len(self) == 0

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        return int(self._exps.sum(axis=1).max())

    def degree_in(self, index: int) -> int:
        if self.is_zero:
            return 0
        return int(self._exps[:, index].max())

    def degrees(self) -> List[int]:
        return [self.degree_in(v) for v in range(self.nvars)]

    def coefficient(self, exps: Sequence[int]) -> float:
        return self.terms().get(tuple(int(e) for e in exps), 0.0)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (N, nvars) array of points (or one point)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.nvars:
            raise VariableMismatch(pts.shape[1], self.nvars)
        if self.is_zero:
            out = np.zeros(pts.shape[0])
            return out[0] if single else out

        monomials = np.ones((pts.shape[0], len(self)))
        for v in range(self.nvars):
            top = self.degree_in(v)
            if top == 0:
                continue
            powers = pts[:, v : v + 1] ** np.arange(top + 1)
            monomials *= powers[:, self._exps[:, v]]
        out = monomials @ self._coeffs
        return out[0] if single else out

    def allclose(self, other: "MultiPoly", atol: float = 1e-12) -> bool:
        diff = self - other
        return diff.is_zero or bool(np.max(np.abs(diff.coeffs)) <= atol)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if self.nvars != other.nvars:
            raise VariableMismatch(self.nvars, other.nvars)

    def add(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        return MultiPoly(
            self.nvars,
            np.vstack([self._exps, other._exps]),
            np.concatenate([self._coeffs, other._coeffs]),
        )

    def sub(self, other: "MultiPoly") -> "MultiPoly":
        return self.add(other.scale(-1.0))

    def scale(self, factor: float) -> "MultiPoly":
        return MultiPoly(self.nvars, self._exps, self._coeffs * float(factor))

    def __add__(self, other: Any) -> "MultiPoly":
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.nvars, other)
        return self.add(other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "MultiPoly":
        if isinstance(other, (int, float)):
            other = MultiPoly.constant(self.nvars, other)
        return self.sub(other)

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1.0)

    def __mul__(self, other: Any) -> "MultiPoly":
        if isinstance(other, (int, float)):
            return self.scale(other)
        return poly_mul(self, other, max_degree=None)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        return poly_pow(self, k, max_degree=None)

    def substitute_affine(
        self, centers: Sequence[float], half_widths: Sequence[float]
    ) -> "MultiPoly":
        """Compose with x_v = c_v + h_v t_v, giving a polynomial in t over [-1,1]^n."""
        if len(centers) != self.nvars or len(half_widths) != self.nvars:
            raise VariableMismatch(len(centers), self.nvars)
        factors = [
            MultiPoly.constant(self.nvars, c) + MultiPoly.variable(self.nvars, v, h)
            for v, (c, h) in enumerate(zip(centers, half_widths))
        ]
        powers: Dict[Tuple[int, int], MultiPoly] = {}

        def power(v: int, e: int) -> MultiPoly:
            if (v, e) not in powers:
                powers[(v, e)] = poly_pow(factors[v], e, max_degree=None)
            return powers[(v, e)]

        result = MultiPoly.zero(self.nvars)
        for row, coeff in zip(self._exps, self._coeffs):
            term = MultiPoly.constant(self.nvars, coeff)
            for v, e in enumerate(row):
                if e:
                    term = poly_mul(term, power(v, int(e)), max_degree=None)
            result = result.add(term)
        return result

    def to_tensor_chebyshev(self) -> "MultiPoly":
        """Re-express in the tensor Chebyshev basis, one variable at a time.

        The result reuses the sparse layout; its exponents are Chebyshev
        degrees, i.e. the row (k_1..k_n) stands for T_{k_1}(x_1)...T_{k_n}(x_n).
        """
        if self.is_zero:
            return self
        conversions: Dict[int, List[Tuple[int, float]]] = {}

        def convert(e: int) -> List[Tuple[int, float]]:
            if e not in conversions:
                unit = np.zeros(e + 1)
                unit[e] = 1.0
                cheb = C.poly2cheb(unit)
                conversions[e] = [(k, float(a)) for k, a in enumerate(cheb) if a != 0.0]
            return conversions[e]

        rows: List[Tuple[int, ...]] = []
        vals: List[float] = []
        for row, coeff in zip(self._exps, self._coeffs):
            for combo in product(*(convert(int(e)) for e in row)):
                rows.append(tuple(k for k, _ in combo))
                vals.append(coeff * float(np.prod([a for _, a in combo])))
        return MultiPoly(self.nvars, np.array(rows, dtype=np.int64), np.array(vals))

    def __repr__(self) -> str:
        if self.is_zero:
            return f"MultiPoly(nvars={self.nvars}, 0)"
        parts = []
        for row, c in list(zip(self._exps, self._coeffs))[:8]:
            mono = "*".join(f"x{v + 1}^{e}" if e > 1 else f"x{v + 1}" for v, e in enumerate(row) if e)
            parts.append(f"{c:+.6g}{'*' + mono if mono else ''}")
        more = f" ... ({len(self)} terms)" if len(self) > 8 else ""
        return f"MultiPoly(nvars={self.nvars}, {' '.join(parts)}{more})"


def poly_mul(
    a: MultiPoly, b: MultiPoly, max_degree: Optional[int] = MAX_TOTAL_DEGREE
) -> MultiPoly:
    """Exact sparse convolution of two polynomials."""
    if a.nvars != b.nvars:
        raise VariableMismatch(a.nvars, b.nvars)
    if a.is_zero or b.is_zero:
        return MultiPoly.zero(a.nvars)
    if max_degree is not None and a.degree + b.degree > max_degree:
        raise DegreeCapExceeded(a.degree + b.degree, max_degree)
    exps = (a.exponents[:, None, :] + b.exponents[None, :, :]).reshape(-1, a.nvars)
    coeffs = np.outer(a.coeffs, b.coeffs).ravel()
    return MultiPoly(a.nvars, exps, coeffs)


def poly_pow(
    a: MultiPoly, k: int, max_degree: Optional[int] = MAX_TOTAL_DEGREE
) -> MultiPoly:
    """``a`` multiplied with itself ``k`` times; ``k == 0`` gives the constant 1."""
    if k < 0:
        raise ValueError("power must be non-negative")
    if max_degree is not None and a.degree > 0 and a.degree * k > max_degree:
        raise DegreeCapExceeded(a.degree * k, max_degree)
    result = MultiPoly.constant(a.nvars, 1.0)
    for _ in range(k):
        result = poly_mul(result, a, max_degree=max_degree)
    return result
