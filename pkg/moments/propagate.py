"""Moments of the surrogate variables z = P(x, q) and Z = (P_1, ..., P_l).

Chebyshev moments E[T_k(z)] can be computed three ways:

* ``recurrence``: build T_k(P) with T_{k+1} = 2 P T_k - T_{k-1} as sparse
  polynomials and take monomial expectations.
* ``conversion``: standard moments E[z^k] mapped through the monomial to
  Chebyshev change of basis. Its matrix entries grow like 3^k, so it drifts
  at high order and is kept for cross-checks.
* ``quadrature``: a tensor Gauss rule over the independent marginals with
  enough nodes per variable to integrate T_k(P) exactly. P is evaluated on
  the grid by contracting its dense coefficient array one variable at a
  time.

``auto`` picks the recurrence while the expanded polynomials stay under the
degree and term caps and falls back to quadrature otherwise.
"""

import functools
import logging
import math
import string
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as C

from polynomials import MAX_TOTAL_DEGREE, MultiPoly, moments_standard_to_cheb, poly_mul, term_capacity
from polynomials.errors import VariableMismatch

from .errors import InsufficientMoments, MomentBlowup
from .marginals import BaseMarginal

logger = logging.getLogger(__name__)

MOMENT_METHODS = ("auto", "recurrence", "conversion", "quadrature")
DEFAULT_TERM_CAP = 250_000
DEFAULT_ENTRY_CAP = 200_000
QUADRATURE_CHUNK = 1 << 16
STRUCTURED_CAP = 1 << 22
VALIDITY_TOL = 1e-9


@dataclass(frozen=True)
class MomentVector:
    """Moments m_0..m_d of a scalar variable in the standard or Chebyshev basis."""

    values: np.ndarray
    basis: str = "standard"
    method: str = ""

    def __post_init__(self) -> None:
        if self.basis not in ("standard", "chebyshev"):
            raise ValueError(f"unknown moment basis: {self.basis}")
        arr = np.array(self.values, dtype=float).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def degree(self) -> int:
        return int(self.values.size) - 1

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, k: int) -> float:
        return float(self.values[k])

    def truncated(self, degree: int) -> "MomentVector":
        return MomentVector(self.values[: degree + 1], self.basis, self.method)


@dataclass(frozen=True)
class MixedChebMoments:
    """Dense table of E[prod_j T_{i_j}(z_j)] indexed by (i_1, ..., i_l)."""

    values: np.ndarray
    method: str = ""

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def ell(self) -> int:
        return self.values.ndim

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(s - 1 for s in self.values.shape)

    def __getitem__(self, index: Sequence[int]) -> float:
        return float(self.values[tuple(index)])

    def as_dict(self) -> Dict[Tuple[int, ...], float]:
        return {tuple(int(i) for i in idx): float(v) for idx, v in np.ndenumerate(self.values)}


@dataclass
class JointMomentTable:
    """Explicit joint raw moments E[prod_v y_v^{e_v}] keyed by exponent multi-index.

    When supplied, it replaces the independent product of marginal moments.
    """

    nvars: int
    table: Dict[Tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.table = {tuple(int(e) for e in k): float(v) for k, v in self.table.items()}
        self.table.setdefault((0,) * self.nvars, 1.0)

    @classmethod
    def from_records(cls, nvars: int, records: Sequence[Mapping]) -> "JointMomentTable":
        return cls(nvars, {tuple(r["exponents"]): r["value"] for r in records})

    def get(self, idx: Sequence[int]) -> float:
        key = tuple(int(e) for e in idx)
        if len(key) != self.nvars:
            raise VariableMismatch(len(key), self.nvars)
        try:
            return self.table[key]
        except KeyError:
            raise InsufficientMoments(sum(key), len(self.table)) from None


def _check_margins(nvars: int, margins: Sequence[BaseMarginal]) -> None:
    if len(margins) != nvars:
        raise VariableMismatch(len(margins), nvars)


def monomial_expectation(
    idx: Sequence[int],
    margins: Sequence[BaseMarginal],
    joint: Optional[JointMomentTable] = None,
) -> float:
    """E[prod_v y_v^{idx_v}], a product of marginal moments under independence."""
    _check_margins(len(idx), margins)
    if joint is not None:
        return joint.get(idx)
    out = 1.0
    for dist, e in zip(margins, idx):
        if e:
            out *= dist.raw_moment(int(e))
    return out


def expectation(
    p: MultiPoly,
    margins: Sequence[BaseMarginal],
    joint: Optional[JointMomentTable] = None,
) -> float:
    """E[p(y)] by linearity over the terms of p."""
    _check_margins(p.nvars, margins)
    if p.is_zero:
        return 0.0
    if joint is not None:
        return float(sum(c * joint.get(e) for e, c in p))
    exps = p.exponents
    factors = np.ones(len(p))
    for v, dist in enumerate(margins):
        top = int(exps[:, v].max())
        if top:
            factors *= dist.moments(top)[exps[:, v]]
    return float(factors @ p.coeffs)


def z_moments_standard(
    p: MultiPoly,
    margins: Sequence[BaseMarginal],
    d: int,
    joint: Optional[JointMomentTable] = None,
    max_degree: Optional[int] = MAX_TOTAL_DEGREE,
) -> MomentVector:
    """E[z^k] for k = 0..d with z = p(x, q), expanding p^k term by term."""
    if d < 0:
        raise ValueError("moment degree must be non-negative")
    _check_margins(p.nvars, margins)
    values = np.empty(d + 1)
    values[0] = 1.0
    power = MultiPoly.constant(p.nvars, 1.0)
    for k in range(1, d + 1):
        power = poly_mul(power, p, max_degree=max_degree)
        values[k] = expectation(power, margins, joint)
    return MomentVector(values, "standard", "expand")


def cheb_compositions(
    p: MultiPoly, d: int, max_degree: Optional[int] = MAX_TOTAL_DEGREE
) -> List[MultiPoly]:
    """[T_0(p), ..., T_d(p)] as polynomials via the three-term recurrence."""
    out = [MultiPoly.constant(p.nvars, 1.0)]
    if d >= 1:
        out.append(p)
    for k in range(1, d):
        out.append(poly_mul(p, out[k], max_degree=max_degree).scale(2.0) - out[k - 1])
    return out


def _predicted_terms(p: MultiPoly, d: int) -> int:
    return term_capacity(p.nvars, max(d * max(p.degree, 0), 0))


def choose_method(
    p: MultiPoly,
    d: int,
    max_degree: Optional[int] = MAX_TOTAL_DEGREE,
    term_cap: int = DEFAULT_TERM_CAP,
) -> str:
    """The path ``auto`` resolves to for this polynomial and degree."""
    degree = d * max(p.degree, 0)
    if (max_degree is None or degree <= max_degree) and _predicted_terms(p, d) <= term_cap:
        return "recurrence"
    return "quadrature"


def _node_counts(margins: Sequence[BaseMarginal], degrees: Sequence[int]) -> List[int]:
    # an n-point Gauss rule is exact through degree 2n - 1
    return [max(1, math.ceil((deg + 1) / 2)) for deg in degrees]


def _gauss_rules(margins: Sequence[BaseMarginal], degrees: Sequence[int]) -> List[Tuple[np.ndarray, np.ndarray]]:
    return [dist.quadrature(n) for dist, n in zip(margins, _node_counts(margins, degrees))]


def _tensor_rule(
    margins: Sequence[BaseMarginal], degrees: Sequence[int], chunk: int = QUADRATURE_CHUNK
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (points, weights) chunks of the tensor Gauss rule exact through ``degrees``."""
    rules = _gauss_rules(margins, degrees)
    sizes = [nodes.size for nodes, _ in rules]
    total = int(np.prod(sizes))
    logger.debug("tensor quadrature over %s nodes (%d points)", sizes, total)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, sizes)
        points = np.column_stack([rules[v][0][idx[v]] for v in range(len(rules))])
        weights = np.ones(flat.size)
        for v in range(len(rules)):
            weights *= rules[v][1][idx[v]]
        yield points, weights


def _cheb_sums(z: np.ndarray, w: np.ndarray, d: int) -> np.ndarray:
    """sum_i w_i T_k(z_i) for k = 0..d by the three-term recurrence."""
    out = np.empty(d + 1)
    out[0] = w.sum()
    if d == 0:
        return out
    out[1] = w @ z
    z2 = 2.0 * z
    prev, cur = np.ones_like(z), z
    for k in range(2, d + 1):
        nxt = z2 * cur
        nxt -= prev
        prev, cur = cur, nxt
        out[k] = w @ cur
    return out


def _dense_coefficients(p: MultiPoly) -> Optional[np.ndarray]:
    """Coefficients of p as a dense array indexed by exponents, or None past the size cap."""
    shape = tuple(deg + 1 for deg in p.degrees())
    if math.prod(shape) > STRUCTURED_CAP:
        return None
    out = np.zeros(shape)
    np.add.at(out, tuple(p.exponents.T), p.coeffs)
    return out


def _structured_cheb_moments(
    p: MultiPoly, rules: Sequence[Tuple[np.ndarray, np.ndarray]], d: int
) -> Optional[np.ndarray]:
    """Tensor-rule moments with p evaluated on the grid one variable at a time.

    Every variable but the first is contracted into the coefficient array up
    front; each slab of first-variable nodes then costs one small matrix
    product. Returns None when the partial array would pass the size cap.
    """
    coeffs = _dense_coefficients(p)
    sizes = [nodes.size for nodes, _ in rules]
    rest = math.prod(sizes[1:])
    if coeffs is None or coeffs.shape[0] * rest > STRUCTURED_CAP:
        return None
    partial = coeffs
    for v in range(1, len(rules)):
        powers = np.vander(rules[v][0], coeffs.shape[v], increasing=True)
        partial = np.moveaxis(np.tensordot(powers, partial, axes=([1], [v])), 0, v)
    partial = partial.reshape(coeffs.shape[0], rest)
    rest_weights = functools.reduce(np.multiply.outer, [w for _, w in rules[1:]], np.ones(())).ravel()

    first_nodes, first_weights = rules[0]
    first_powers = np.vander(first_nodes, coeffs.shape[0], increasing=True)
    rows = max(1, QUADRATURE_CHUNK // rest)
    logger.debug("structured tensor quadrature over %s nodes", sizes)
    values = np.zeros(d + 1)
    for start in range(0, first_nodes.size, rows):
        z = (first_powers[start : start + rows] @ partial).ravel()
        w = np.multiply.outer(first_weights[start : start + rows], rest_weights).ravel()
        values += _cheb_sums(z, w, d)
    return values


def _quadrature_cheb_moments(p: MultiPoly, margins: Sequence[BaseMarginal], d: int) -> np.ndarray:
    degrees = [d * deg for deg in p.degrees()]
    values = _structured_cheb_moments(p, _gauss_rules(margins, degrees), d)
    if values is not None:
        return values
    values = np.zeros(d + 1)
    for points, weights in _tensor_rule(margins, degrees):
        values += _cheb_sums(p.evaluate(points), weights, d)
    return values


def z_moments_cheb(
    p: MultiPoly,
    margins: Sequence[BaseMarginal],
    d: int,
    method: str = "recurrence",
    joint: Optional[JointMomentTable] = None,
    max_degree: Optional[int] = MAX_TOTAL_DEGREE,
    term_cap: int = DEFAULT_TERM_CAP,
) -> MomentVector:
    """Chebyshev moments E[T_k(z)], k = 0..d, for z = p(x, q).

    ``p`` is expected to be rescaled so |p| <= 1 on the support; the
    quadrature path needs independent marginals and ignores ``joint``.
    """
    if d < 0:
        raise ValueError("moment degree must be non-negative")
    if method not in MOMENT_METHODS:
        raise ValueError(f"unknown moment method: {method}")
    _check_margins(p.nvars, margins)
    if method == "auto":
        method = choose_method(p, d, max_degree, term_cap)
        logger.debug("moment method auto -> %s (d=%d, deg P=%d)", method, d, p.degree)
    if method == "quadrature" and joint is not None:
        raise ValueError("quadrature moments need independent marginals, not a joint table")

    if method == "recurrence":
        if _predicted_terms(p, d) > term_cap:
            raise MomentBlowup(
                f"T_{d}(P) may hold {_predicted_terms(p, d)} terms, above cap {term_cap}",
                {"degree": d, "poly_degree": p.degree, "term_cap": term_cap},
            )
        polys = cheb_compositions(p, d, max_degree)
        values = np.array([expectation(t, margins, joint) for t in polys])
        values[0] = 1.0
    elif method == "conversion":
        standard = z_moments_standard(p, margins, d, joint, max_degree)
        values = moments_standard_to_cheb(standard.values)
    else:
        values = _quadrature_cheb_moments(p, margins, d)
        values[0] = 1.0
    return MomentVector(values, "chebyshev", method)


def moment_validity_degree(mv: MomentVector, tol: float = VALIDITY_TOL) -> int:
    """Largest d' with |m_k| <= 1 + tol for every k <= d'."""
    bad = np.flatnonzero(np.abs(mv.values) > 1.0 + tol)
    return mv.degree if bad.size == 0 else int(bad[0]) - 1


def divergence_degree(a: MomentVector, b: MomentVector, tol: float = 1e-8) -> Optional[int]:
    """First index where two moment vectors differ by more than ``tol``; None if they agree."""
    n = min(len(a), len(b))
    diff = np.flatnonzero(np.abs(a.values[:n] - b.values[:n]) > tol)
    return int(diff[0]) if diff.size else None


def _einsum_outer(ell: int) -> str:
    letters = string.ascii_lowercase[1 : ell + 1]
    return "a," + ",".join(f"a{c}" for c in letters) + "->" + letters


def mixed_cheb_moments(
    polys: Sequence[MultiPoly],
    margins: Sequence[BaseMarginal],
    degrees: Sequence[int],
    method: str = "recurrence",
    joint: Optional[JointMomentTable] = None,
    max_degree: Optional[int] = MAX_TOTAL_DEGREE,
    term_cap: int = DEFAULT_TERM_CAP,
    entry_cap: int = DEFAULT_ENTRY_CAP,
) -> MixedChebMoments:
    """E[prod_j T_{i_j}(P_j)] for every i_j <= degrees[j]."""
    if not polys:
        raise ValueError("at least one polynomial is required")
    if len(degrees) != len(polys):
        raise ValueError("one degree per polynomial is required")
    nvars = polys[0].nvars
    for p in polys:
        if p.nvars != nvars:
            raise VariableMismatch(p.nvars, nvars)
    _check_margins(nvars, margins)
    if len(polys) > 25:
        raise MomentBlowup(f"{len(polys)} constraint polynomials are more than supported", {"ell": len(polys)})

    shape = tuple(int(d) + 1 for d in degrees)
    entries = int(np.prod(shape))
    combined = sum(d * max(p.degree, 0) for p, d in zip(polys, degrees))
    report = {"entries": entries, "entry_cap": entry_cap, "total_degree": combined, "term_cap": term_cap}
    if entries > entry_cap:
        raise MomentBlowup(f"mixed moment table needs {entries} entries, above cap {entry_cap}", report)

    if method == "auto":
        within = (max_degree is None or combined <= max_degree) and term_capacity(nvars, combined) <= term_cap
        method = "recurrence" if within else "quadrature"
        logger.debug("mixed moment method auto -> %s", method)

    if method == "recurrence":
        if term_capacity(nvars, combined) > term_cap:
            raise MomentBlowup(
                f"products of degree {combined} may hold {term_capacity(nvars, combined)} terms, above cap {term_cap}",
                report,
            )
        comps = [cheb_compositions(p, d, max_degree) for p, d in zip(polys, degrees)]
        values = np.empty(shape)
        for idx in np.ndindex(*shape):
            factors = [comps[j][i] for j, i in enumerate(idx) if i]
            if not factors:
                values[idx] = 1.0
                continue
            prod = factors[0]
            for f in factors[1:]:
                prod = poly_mul(prod, f, max_degree=max_degree)
            values[idx] = expectation(prod, margins, joint)
    elif method == "quadrature":
        if joint is not None:
            raise ValueError("quadrature moments need independent marginals, not a joint table")
        per_var = np.zeros(nvars, dtype=int)
        for p, d in zip(polys, degrees):
            per_var += d * np.asarray(p.degrees(), dtype=int)
        values = np.zeros(shape)
        spec = _einsum_outer(len(polys))
        for points, weights in _tensor_rule(margins, per_var.tolist()):
            vander = [C.chebvander(p.evaluate(points), d) for p, d in zip(polys, degrees)]
            values += np.einsum(spec, weights, *vander)
        values[(0,) * len(polys)] = 1.0
    else:
        raise ValueError(f"unknown mixed moment method: {method}")
    return MixedChebMoments(values, method)
