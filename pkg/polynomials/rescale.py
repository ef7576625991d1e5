"""Bounds on a polynomial over a box, and constraint rescaling into [-1, 1]."""

import heapq
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import EmptyUnsafeSet
from .multipoly import MultiPoly

logger = logging.getLogger(__name__)

BOUND_METHODS = ("chebyshev", "monomial", "range")

Box = Sequence[Tuple[float, float]]


class RescaledConstraint(NamedTuple):
    poly: MultiPoly
    lower: float
    upper: float
    scale: float = 1.0
    method: str = "chebyshev"


def box_bound(p: MultiPoly, method: str = "chebyshev") -> float:
    """Upper bound on max |p| over [-1, 1]^nvars.

    ``chebyshev`` sums the absolute tensor-Chebyshev coefficients (each
    |T_k| <= 1 on the box); ``monomial`` sums absolute monomial coefficients.
    The Chebyshev bound is never looser than the monomial one.
    """
    if p.is_zero:
        return 0.0
    if method == "monomial":
        return float(np.sum(np.abs(p.coeffs)))
    if method == "chebyshev":
        return float(np.sum(np.abs(p.to_tensor_chebyshev().coeffs)))
    if method == "range":
        lo, hi = range_bound(p)
        return max(abs(lo), abs(hi))
    raise ValueError(f"unknown bound method: {method}")


def _enclosure(p: MultiPoly) -> Tuple[float, float]:
    """Interval [c0 - r, c0 + r] containing p on [-1, 1]^n from tensor Chebyshev data."""
    cheb = p.to_tensor_chebyshev()
    if cheb.is_zero:
        return 0.0, 0.0
    is_const = ~cheb.exponents.any(axis=1)
    c0 = float(cheb.coeffs[is_const].sum())
    radius = float(np.abs(cheb.coeffs[~is_const]).sum())
    return c0 - radius, c0 + radius


def _restrict(p: MultiPoly, box: Box) -> MultiPoly:
    centers = [0.5 * (a + b) for a, b in box]
    halves = [0.5 * (b - a) for a, b in box]
    return p.substitute_affine(centers, halves)


def range_bound(
    p: MultiPoly,
    box: Optional[Box] = None,
    tol: float = 1e-3,
    max_boxes: int = 1500,
    stop_below: Optional[float] = None,
) -> Tuple[float, float]:
    """Certified enclosure [lo, hi] of p over ``box`` by branch-and-bound bisection.

    Each sub-box is bounded by the Chebyshev enclosure; the box with the
    worst bound is split along its widest side until the enclosure is within
    ``tol`` of a sampled value or the box budget runs out. With
    ``stop_below`` set, each side also stops as soon as its bound is at
    most that value.
    """
    box = [(-1.0, 1.0)] * p.nvars if box is None else [tuple(map(float, ab)) for ab in box]
    if p.is_zero:
        return 0.0, 0.0
    return -_max_bound(-p, box, tol, max_boxes, stop_below), _max_bound(p, box, tol, max_boxes, stop_below)


def _max_bound(
    p: MultiPoly, box: List[Tuple[float, float]], tol: float, max_boxes: int, stop_below: Optional[float] = None
) -> float:
    def score(sub: List[Tuple[float, float]]) -> Tuple[float, float]:
        _, hi = _enclosure(_restrict(p, sub))
        center = np.array([0.5 * (a + b) for a, b in sub])
        return hi, float(p.evaluate(center))

    hi, best = score(box)
    heap: List[Tuple[float, int, List[Tuple[float, float]]]] = [(-hi, 0, box)]
    counter = 1
    while heap and counter < max_boxes:
        neg_hi, _, sub = heap[0]
        if -neg_hi - best <= tol or (stop_below is not None and -neg_hi <= stop_below):
            break
        heapq.heappop(heap)
        axis = int(np.argmax([b - a for a, b in sub]))
        a, b = sub[axis]
        mid = 0.5 * (a + b)
        for half in ((a, mid), (mid, b)):
            child = list(sub)
            child[axis] = half
            child_hi, child_val = score(child)
            best = max(best, child_val)
            heapq.heappush(heap, (-child_hi, counter, child))
            counter += 1
    bound = -heap[0][0] if heap else best
    logger.debug("range bound %.6g after %d boxes (sampled max %.6g)", bound, counter, best)
    return bound


def support_bound(
    p: MultiPoly,
    box: Optional[Box] = None,
    method: str = "chebyshev",
    settle_at: Optional[float] = None,
) -> float:
    """Upper bound on max |p| over ``box`` (default [-1, 1]^nvars).

    For ``range``, a bound at or below ``settle_at`` ends the search early.
    """
    if method == "range":
        lo, hi = range_bound(p, box, stop_below=settle_at)
        return max(abs(lo), abs(hi))
    if box is None:
        return box_bound(p, method)
    return box_bound(_restrict(p, box), method)


def rescale_constraint(
    p: MultiPoly,
    lower: float,
    upper: float,
    box: Optional[Box] = None,
    method: str = "chebyshev",
) -> RescaledConstraint:
    """Scale (p, l, u) so |p| <= 1 on the box and the thresholds lie in [-1, 1].

    Dividing by s = bound(p) > 1 keeps {l <= p <= u} pointwise; thresholds are
    then clipped to [-1, 1], which leaves membership unchanged on the box.
    """
    if lower > upper:
        raise ValueError(f"lower threshold {lower} exceeds upper threshold {upper}")
    if p.is_zero:
        if lower <= 0.0 <= upper:
            return RescaledConstraint(p, max(lower, -1.0), min(upper, 1.0), 1.0, method)
        raise EmptyUnsafeSet(f"p is identically zero and 0 is outside [{lower}, {upper}]")

    s = support_bound(p, box, method, settle_at=1.0)
    scale = s if s > 1.0 else 1.0
    if scale > 1.0:
        logger.info("rescaling constraint by %.6g (%s bound)", scale, method)
        p = p.scale(1.0 / scale)
    lo = max(lower / scale, -1.0)
    hi = min(upper / scale, 1.0)
    if lo > hi:
        raise EmptyUnsafeSet(f"thresholds [{lower}, {upper}] miss the range of p on the box")
    return RescaledConstraint(p, lo, hi, scale, method)
