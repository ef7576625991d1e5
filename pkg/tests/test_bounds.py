import numpy as np
import pytest
from pydantic import ValidationError

from chebrisk import (
    Constraint,
    RiskBounds,
    RiskEstimator,
    RiskProblem,
    Settings,
    clamp_probability,
    lower_bound_single,
    mixed_validity_degree,
    upper_bound_multi,
    upper_bound_single,
)
from moments import MixedChebMoments, MomentInstability, MomentVector, UniformMarginal
from polynomials import ChebSeries, MultiPoly, VariableMismatch
from sos import IndicatorCertificate, IntervalSet, MissingCertificate, complement

HOLE = IntervalSet.single(-0.4, 0.0)


def _cert(coeffs) -> IndicatorCertificate:
    coeffs = np.asarray(coeffs, dtype=float)
    return IndicatorCertificate(target=HOLE, degree=coeffs.size - 1, coeffs=ChebSeries(coeffs))


def test_clamp_probability():
    assert clamp_probability(0.3, "p_u") == (0.3, None)
    assert clamp_probability(1.2, "p_u") == (1.0, "p_u=1.2->1")
    assert clamp_probability(-0.05, "p_l") == (0.0, "p_l=-0.05->0")


def test_contraction_is_a_dot_product():
    mz = MomentVector([1.0, -0.1, 0.3], "chebyshev")
    raw, clamped = upper_bound_single(_cert([0.5, 0.2, 0.1]), mz)
    assert raw == pytest.approx(0.51)
    assert clamped == pytest.approx(0.51)
    raw, clamped = lower_bound_single(_cert([0.5, 0.2, 0.1]), mz)
    assert raw == pytest.approx(0.49)


def test_raw_value_is_kept_when_clamped():
    mz = MomentVector([1.0, 0.0], "chebyshev")
    assert upper_bound_single(_cert([1.5, 0.0]), mz) == (1.5, 1.0)
    assert lower_bound_single(_cert([1.5, 0.0]), mz) == (-0.5, 0.0)


def test_contraction_rejects_bad_moments():
    with pytest.raises(ValueError):
        upper_bound_single(_cert([0.5, 0.2]), MomentVector([1.0, 0.1], "standard"))
    with pytest.raises(ValueError):
        upper_bound_single(_cert([0.5, 0.2, 0.1]), MomentVector([1.0, 0.1], "chebyshev"))
    with pytest.raises(MomentInstability) as info:
        upper_bound_single(_cert([0.5, 0.2, 0.1]), MomentVector([1.0, 0.1, 1.5], "chebyshev"))
    assert info.value.usable_degree == 1


def test_product_bound_contracts_outer_product():
    mixed = MixedChebMoments(np.array([[1.0, 0.3], [0.0, -0.25]]))
    raw, clamped = upper_bound_multi([_cert([1.0, 0.5]), _cert([0.2, 0.3])], mixed)
    assert raw == pytest.approx(0.2525)
    assert clamped == pytest.approx(0.2525)
    with pytest.raises(ValueError):
        upper_bound_multi([_cert([1.0, 0.5])], mixed)


def test_mixed_validity_degree():
    values = np.zeros((4, 4))
    values[0, 0] = 1.0
    values[3, 1] = 1.5
    assert mixed_validity_degree(MixedChebMoments(values)) == 2


def test_problem_membership_is_closed():
    x = MultiPoly.variable(1, 0)
    problem = RiskProblem([Constraint(x, -0.5, 0.5)], [UniformMarginal(a=-1.0, b=1.0)])
    np.testing.assert_array_equal(problem.contains(np.array([[0.5], [-0.5], [0.6]])), [True, True, False])
    assert problem.variable_names == ["y1"]


def test_problem_checks():
    x = MultiPoly.variable(2, 0)
    with pytest.raises(VariableMismatch):
        RiskProblem([Constraint(x, 0.0, 1.0)], [UniformMarginal(a=-1.0, b=1.0)])
    with pytest.raises(ValueError):
        RiskProblem([], [UniformMarginal(a=-1.0, b=1.0)])
    with pytest.raises(ValueError):
        RiskProblem([Constraint(MultiPoly.variable(1, 0), 1.0, 0.0)], [UniformMarginal(a=-1.0, b=1.0)])


def test_bounds_model():
    with pytest.raises(ValidationError):
        RiskBounds(p_l=0.0, p_u=1.2)
    row = RiskBounds(p_l=0.4, p_u=0.9, degree_requested=20, degree_used=20, diagnostics={"clamp_events": ["p_u=1.1->1"]}).as_row("demo")
    assert list(row) == [
        "problem", "p_l", "p_u", "d_requested", "d_used", "validity_degree", "upper_only", "offline_s", "online_s", "clamped",
    ]
    assert row["clamped"] == "p_u=1.1->1"


@pytest.mark.asyncio
async def test_estimate_brackets_ball_problem(estimator, load_problem):
    problem = load_problem("illustrative").to_risk_problem(10)
    bounds = await estimator.estimate(problem)
    assert 0.0 <= bounds.p_l <= 0.69
    assert 0.71 <= bounds.p_u <= 1.0
    assert bounds.degree_used == 10
    assert bounds.validity_degree == 10
    assert len(bounds.certificate_ids) == 2
    assert bounds.diagnostics["moment_method"] == "recurrence"
    assert not bounds.upper_only

    again = await estimator.estimate(problem)
    assert estimator.store.hits == 2
    assert again.p_u == bounds.p_u


@pytest.mark.asyncio
async def test_online_step_alone(estimator, load_problem):
    problem = load_problem("illustrative").to_risk_problem(8)
    bounds = await estimator.estimate(problem)
    _, cert_k = await estimator.certificate(HOLE, 8, solve_missing=False)
    _, cert_kbar = await estimator.certificate(complement(HOLE), 8, solve_missing=False)
    mz = estimator._moments(problem.constraints[0].poly, problem.margins, 8)
    online = estimator.bounds_from_moments(cert_k, cert_kbar, mz)
    assert online.p_u == pytest.approx(bounds.p_u, abs=1e-12)
    assert online.p_l == pytest.approx(bounds.p_l, abs=1e-12)


@pytest.mark.asyncio
async def test_missing_certificates_are_reported(estimator, load_problem):
    problem = load_problem("illustrative").to_risk_problem(6)
    with pytest.raises(MissingCertificate):
        await estimator.estimate(problem, solve_missing=False)


@pytest.mark.asyncio
async def test_empty_unsafe_set_gives_zero(estimator):
    x = MultiPoly.variable(1, 0)
    problem = RiskProblem([Constraint(x, 1.5, 2.0)], [UniformMarginal(a=-0.5, b=0.5)], degree=6)
    bounds = await estimator.estimate(problem)
    assert (bounds.p_l, bounds.p_u) == (0.0, 0.0)
    assert "empty_unsafe_set" in bounds.diagnostics


@pytest.mark.asyncio
async def test_two_constraints_give_upper_bound_only(estimator, load_problem):
    problem = load_problem("two_constraint").to_risk_problem(10)
    bounds = await estimator.estimate(problem)
    assert bounds.upper_only
    assert bounds.p_l == 0.0
    assert bounds.p_u >= 1.0 - 1e-5
    assert len(bounds.certificate_ids) == 2


@pytest.mark.asyncio
async def test_strict_degree_raises_instability(tmp_path):
    settings = Settings(cache_dir=str(tmp_path), strict_degree=True, moment_method="conversion")
    estimator = RiskEstimator(settings)
    x = MultiPoly.variable(1, 0)
    # a wide uniform pushes conversion moments out of [-1, 1] at high order
    problem = RiskProblem([Constraint(x, -0.5, 0.5)], [UniformMarginal(a=-1.0, b=1.0)], degree=60)
    with pytest.raises(MomentInstability):
        await estimator.estimate(problem)
