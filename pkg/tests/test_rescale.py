import math

import pytest

from polynomials import (
    EmptyUnsafeSet,
    MultiPoly,
    box_bound,
    range_bound,
    rescale_constraint,
    support_bound,
)


def _x(coeff: float = 1.0) -> MultiPoly:
    return MultiPoly.variable(1, 0, coeff)


def test_box_bound_of_linear_surrogate(ball_poly):
    assert box_bound(ball_poly, "chebyshev") == pytest.approx(1.0)
    assert box_bound(ball_poly, "monomial") == pytest.approx(1.0)


def test_chebyshev_bound_is_tighter_than_monomial():
    p = MultiPoly.from_terms(1, {(4,): 1.0, (2,): -1.0})
    assert box_bound(p, "monomial") == pytest.approx(2.0)
    assert box_bound(p, "chebyshev") == pytest.approx(0.25)


def test_range_bound_encloses_true_range():
    p = MultiPoly.from_terms(1, {(4,): 1.0, (2,): -1.0})
    lo, hi = range_bound(p)
    assert -0.26 <= lo <= -0.25 + 1e-12
    assert -1e-12 <= hi <= 0.01


def test_range_bound_on_support_box(ball_poly):
    lo, hi = range_bound(ball_poly, [(-0.5, 0.5), (0.0, 1.0)])
    assert lo == pytest.approx(-0.75, abs=1e-9)
    assert hi == pytest.approx(0.25, abs=1e-9)
    assert support_bound(ball_poly, [(-0.5, 0.5), (0.0, 1.0)], "range") == pytest.approx(0.75, abs=1e-9)


def test_unknown_bound_method():
    with pytest.raises(ValueError):
        box_bound(_x(), "interval")


def test_rescale_divides_by_bound():
    r = rescale_constraint(_x(2.0), -1.0, 1.0)
    assert r.scale == pytest.approx(2.0)
    assert r.poly.allclose(_x())
    assert (r.lower, r.upper) == pytest.approx((-0.5, 0.5))


def test_rescale_keeps_bounded_polynomial():
    r = rescale_constraint(_x(0.5), -0.4, 0.0)
    assert r.scale == 1.0
    assert (r.lower, r.upper) == (-0.4, 0.0)


def test_thresholds_are_clipped():
    r = rescale_constraint(_x(2.0), -3.0, 1.0)
    assert (r.lower, r.upper) == pytest.approx((-1.0, 0.5))


def test_support_box_tightens_the_scale():
    r = rescale_constraint(_x(4.0), 0.0, 1.0, box=[(0.0, 0.5)])
    assert r.scale == pytest.approx(2.0)
    r = rescale_constraint(_x(4.0), 0.0, 1.0)
    assert r.scale == pytest.approx(4.0)


def test_empty_after_clipping():
    with pytest.raises(EmptyUnsafeSet):
        rescale_constraint(_x(0.5), 1.5, 2.0)


def test_zero_polynomial():
    r = rescale_constraint(MultiPoly.zero(1), -2.0, 0.5)
    assert (r.lower, r.upper) == (-1.0, 0.5)
    with pytest.raises(EmptyUnsafeSet):
        rescale_constraint(MultiPoly.zero(1), 0.1, 0.5)


def test_reversed_thresholds():
    with pytest.raises(ValueError):
        rescale_constraint(_x(), 0.5, 0.1)


def test_range_bound_settles_once_below_threshold():
    p = MultiPoly.from_terms(1, {(1,): 2.4, (3,): -2.4})
    peak = 2.4 * (2.0 / 3.0) / math.sqrt(3.0)
    lo, hi = range_bound(p, stop_below=1.0)
    assert peak <= hi <= 1.0
    assert -1.0 <= lo <= -peak
    assert support_bound(p, method="range") == pytest.approx(peak, abs=2e-3)
    r = rescale_constraint(p, 0.5, 2.0, method="range")
    assert r.scale == 1.0
    assert r.upper == 1.0
