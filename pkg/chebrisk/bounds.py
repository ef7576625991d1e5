"""Risk bounds from indicator certificates and Chebyshev moments.

Offline, solve (or fetch) certificates p_K >= I_K and p_Kbar >= I_Kbar on
[-1, 1]. Online, contract their coefficients with the Chebyshev moments of
z = P(x, q):

    p_u = sum_i c_i E[T_i(z)]          p_l = 1 - sum_i cbar_i E[T_i(z)]

With several constraints only the product upper bound is available and the
lower bound is reported as 0.
"""

import asyncio
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from moments import (
    BaseMarginal,
    MixedChebMoments,
    MomentInstability,
    MomentVector,
    divergence_degree,
    mixed_cheb_moments,
    moment_validity_degree,
    z_moments_cheb,
)
from moments.propagate import VALIDITY_TOL
from polynomials import EmptyUnsafeSet, MultiPoly, VariableMismatch, rescale_constraint
from sos import (
    CertificateStore,
    IndicatorCertificate,
    IntervalSet,
    certificate_key,
    complement,
    even_degree,
)

from .config import Settings
from .errors import StageError

logger = logging.getLogger(__name__)

SWEEP_DEGREES = (20, 30, 40, 50, 60, 66)
SWEEP_REFERENCE = {
    20: (0.92, 0.401),
    30: (0.879, 0.485),
    40: (0.859, 0.511),
    50: (0.822, 0.562),
    60: (0.804, 0.586),
    66: (0.798, 0.591),
}


@dataclass(frozen=True)
class Constraint:
    """l <= poly <= u."""

    poly: MultiPoly
    lower: float
    upper: float


@dataclass
class RiskProblem:
    """Unsafe set {l_j <= P_j(x, q) <= u_j for all j} under independent marginals."""

    constraints: List[Constraint]
    margins: List[BaseMarginal]
    degree: int = 20
    name: str = ""
    variable_names: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.constraints:
            raise ValueError("a risk problem needs at least one constraint")
        for c in self.constraints:
            if c.poly.nvars != len(self.margins):
                raise VariableMismatch(c.poly.nvars, len(self.margins))
            if c.lower > c.upper:
                raise ValueError(f"lower threshold {c.lower} exceeds upper threshold {c.upper}")
        if not self.variable_names:
            self.variable_names = [f"y{v + 1}" for v in range(len(self.margins))]

    @property
    def nvars(self) -> int:
        return len(self.margins)

    @property
    def ell(self) -> int:
        return len(self.constraints)

    def support_box(self) -> List[Tuple[float, float]]:
        return [dist.support() for dist in self.margins]

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Closed-interval membership of each row of ``points`` in the unsafe set."""
        pts = np.atleast_2d(points)
        inside = np.ones(pts.shape[0], dtype=bool)
        for c in self.constraints:
            z = c.poly.evaluate(pts)
            inside &= (z >= c.lower) & (z <= c.upper)
        return inside


class RiskBounds(BaseModel):
    """The bracket p_l <= P(unsafe) <= p_u and how it was obtained."""

    p_l: float = Field(ge=0.0, le=1.0)
    p_u: float = Field(ge=0.0, le=1.0)
    degree_requested: int = 0
    degree_used: int = 0
    validity_degree: int = 0
    certificate_ids: List[str] = Field(default_factory=list)
    offline_s: float = 0.0
    online_s: float = 0.0
    upper_only: bool = False
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    def as_row(self, problem: str = "") -> Dict[str, Any]:
        """Flat record for CSV reports."""
        return {
            "problem": problem,
            "p_l": round(self.p_l, 6),
            "p_u": round(self.p_u, 6),
            "d_requested": self.degree_requested,
            "d_used": self.degree_used,
            "validity_degree": self.validity_degree,
            "upper_only": self.upper_only,
            "offline_s": round(self.offline_s, 4),
            "online_s": round(self.online_s, 6),
            "clamped": ";".join(self.diagnostics.get("clamp_events", [])),
        }


def clamp_probability(raw: float, label: str) -> Tuple[float, Optional[str]]:
    """Clip ``raw`` to [0, 1]; the second item describes the clip, if any."""
    if raw < 0.0:
        return 0.0, f"{label}={raw:.6g}->0"
    if raw > 1.0:
        return 1.0, f"{label}={raw:.6g}->1"
    return raw, None


def _contract(cert: IndicatorCertificate, mz: MomentVector) -> float:
    if mz.basis != "chebyshev":
        raise ValueError("indicator certificates contract with Chebyshev moments")
    if cert.degree > mz.degree:
        raise ValueError(f"certificate degree {cert.degree} exceeds moment degree {mz.degree}")
    usable = moment_validity_degree(mz.truncated(cert.degree))
    if usable < cert.degree:
        raise MomentInstability(cert.degree, usable)
    coeffs = cert.coeffs.padded(cert.degree + 1)
    return float(coeffs @ mz.values[: cert.degree + 1])


def upper_bound_single(cert_k: IndicatorCertificate, mz: MomentVector) -> Tuple[float, float]:
    """(raw, clamped) value of sum_i c_i E[T_i(z)]."""
    raw = _contract(cert_k, mz)
    clamped, event = clamp_probability(raw, "p_u")
    if event:
        logger.warning("upper bound clamped: %s", event)
    return raw, clamped


def lower_bound_single(cert_kbar: IndicatorCertificate, mz: MomentVector) -> Tuple[float, float]:
    """(raw, clamped) value of 1 - sum_i cbar_i E[T_i(z)]."""
    raw = 1.0 - _contract(cert_kbar, mz)
    clamped, event = clamp_probability(raw, "p_l")
    if event:
        logger.warning("lower bound clamped: %s", event)
    return raw, clamped


def upper_bound_multi(certs: Sequence[IndicatorCertificate], mixed: MixedChebMoments) -> Tuple[float, float]:
    """(raw, clamped) E[prod_j p_j(z_j)] from the mixed Chebyshev moments.

    The tensor coefficients of prod_j p_j(z_j) are the outer product of the
    per-factor coefficient vectors.
    """
    if len(certs) != mixed.ell:
        raise ValueError(f"{len(certs)} certificates for {mixed.ell} moment axes")
    for cert, deg in zip(certs, mixed.degrees):
        if cert.degree > deg:
            raise ValueError(f"certificate degree {cert.degree} exceeds mixed moment degree {deg}")
    table = mixed.values[tuple(slice(0, c.degree + 1) for c in certs)]
    for cert in certs:
        table = np.tensordot(cert.coeffs.padded(cert.degree + 1), table, axes=(0, 0))
    raw = float(table)
    clamped, event = clamp_probability(raw, "p_u")
    if event:
        logger.warning("upper bound clamped: %s", event)
    return raw, clamped


def mixed_validity_degree(mixed: MixedChebMoments, tol: float = VALIDITY_TOL) -> int:
    """Largest d' such that every entry with all indices <= d' lies in [-1, 1]."""
    top = min(mixed.degrees)
    for d in range(top, -1, -1):
        block = mixed.values[tuple(slice(0, d + 1) for _ in range(mixed.ell))]
        if np.all(np.abs(block) <= 1.0 + tol):
            return d
    return -1


def _floor_even(d: int) -> int:
    return d - (d % 2)


class RiskEstimator:
    """Runs the offline and online steps against a certificate store."""

    def __init__(self, settings: Optional[Settings] = None, store: Optional[CertificateStore] = None):
        self.settings = settings or Settings()
        self.store = store or CertificateStore(self.settings.cache_dir)
        self.solver_config = self.settings.solver_config()
        self.audit = self.settings.audit_tolerances()

    async def initialize(self) -> None:
        await self.store.initialize()

    async def certificate(self, target: IntervalSet, degree: int, solve_missing: bool) -> Tuple[str, IndicatorCertificate]:
        cert = await self.store.fetch_or_solve(target, degree, self.solver_config, self.audit, solve_missing)
        return certificate_key(target, degree, self.solver_config), cert

    def _moments(self, poly: MultiPoly, margins: Sequence[BaseMarginal], d: int) -> MomentVector:
        s = self.settings
        return z_moments_cheb(
            poly, margins, d, method=s.moment_method, max_degree=s.max_total_degree, term_cap=s.term_cap
        )

    def _settle_degree(self, d_target: int, validity: int) -> int:
        d_used = min(d_target, _floor_even(validity))
        if d_used < d_target:
            if self.settings.strict_degree:
                raise MomentInstability(d_target, validity)
            logger.warning("Chebyshev moments valid only to degree %d; using d=%d instead of %d", validity, d_used, d_target)
        return d_used

    async def estimate(
        self,
        problem: RiskProblem,
        degree: Optional[int] = None,
        solve_missing: bool = True,
    ) -> RiskBounds:
        """Bounds on P(unsafe) for ``problem`` at the requested certificate degree."""
        d_requested = problem.degree if degree is None else degree
        d_target = even_degree(d_requested)
        if d_target != d_requested:
            logger.warning("odd degree %d rounded up to %d", d_requested, d_target)
        diagnostics: Dict[str, Any] = {"clamp_events": []}

        try:
            box = problem.support_box()
            rescaled = [
                rescale_constraint(c.poly, c.lower, c.upper, box, self.settings.bound_method)
                for c in problem.constraints
            ]
        except EmptyUnsafeSet as e:
            logger.info("unsafe set is empty on the support: %s", e)
            return RiskBounds(
                p_l=0.0, p_u=0.0, degree_requested=d_requested,
                diagnostics={"empty_unsafe_set": str(e), "clamp_events": []},
            )
        except Exception as e:
            raise StageError("rescale", e) from e
        diagnostics["rescale"] = [{"scale": r.scale, "method": r.method, "lower": r.lower, "upper": r.upper} for r in rescaled]

        if problem.ell == 1:
            return await self._estimate_single(problem, rescaled[0], d_requested, d_target, solve_missing, diagnostics)
        return await self._estimate_multi(problem, rescaled, d_requested, d_target, solve_missing, diagnostics)

    async def _estimate_single(self, problem, rescaled, d_requested, d_target, solve_missing, diagnostics) -> RiskBounds:
        try:
            start = time.perf_counter()
            mz = await asyncio.to_thread(self._moments, rescaled.poly, problem.margins, d_target)
            diagnostics["moments_s"] = time.perf_counter() - start
            diagnostics["moment_method"] = mz.method
            validity = moment_validity_degree(mz)
            if self.settings.cross_check_degree > 0:
                k = min(self.settings.cross_check_degree, d_target)
                alt = z_moments_cheb(rescaled.poly, problem.margins, k, method="conversion", max_degree=None)
                diverged = divergence_degree(mz.truncated(k), alt)
                diagnostics["divergence_degree"] = diverged
                if diverged is not None:
                    logger.warning("moment paths diverge from degree %d", diverged)
            d_used = self._settle_degree(d_target, validity)
        except MomentInstability:
            raise
        except Exception as e:
            raise StageError("moments", e) from e

        target = IntervalSet.single(rescaled.lower, rescaled.upper)
        try:
            start = time.perf_counter()
            (key_k, cert_k), (key_kbar, cert_kbar) = await asyncio.gather(
                self.certificate(target, d_used, solve_missing),
                self.certificate(complement(target), d_used, solve_missing),
            )
            offline_s = time.perf_counter() - start
        except LookupError:
            raise
        except Exception as e:
            raise StageError("certificates", e) from e

        try:
            start = time.perf_counter()
            mz_used = mz.truncated(d_used)
            raw_u, p_u = upper_bound_single(cert_k, mz_used)
            raw_l, p_l = lower_bound_single(cert_kbar, mz_used)
            online_s = time.perf_counter() - start
        except MomentInstability:
            raise
        except Exception as e:
            raise StageError("contract", e) from e

        diagnostics["raw_p_u"] = raw_u
        diagnostics["raw_p_l"] = raw_l
        for raw, label in ((raw_u, "p_u"), (raw_l, "p_l")):
            event = clamp_probability(raw, label)[1]
            if event:
                diagnostics["clamp_events"].append(event)
        if p_l > p_u:
            logger.warning("lower bound %.6f exceeds upper bound %.6f", p_l, p_u)
            diagnostics["clamp_events"].append(f"p_l={p_l:.6g}>p_u={p_u:.6g}")
            p_l = p_u
        diagnostics["objectives"] = {"K": cert_k.objective_value, "Kbar": cert_kbar.objective_value}

        bounds = RiskBounds(
            p_l=p_l, p_u=p_u, degree_requested=d_requested, degree_used=d_used, validity_degree=validity,
            certificate_ids=[key_k, key_kbar], offline_s=offline_s, online_s=online_s, diagnostics=diagnostics,
        )
        logger.info("risk bounds [%.4f, %.4f] at d=%d (validity %d)", p_l, p_u, d_used, validity)
        return bounds

    async def _estimate_multi(self, problem, rescaled, d_requested, d_target, solve_missing, diagnostics) -> RiskBounds:
        s = self.settings
        try:
            start = time.perf_counter()
            mixed = await asyncio.to_thread(
                mixed_cheb_moments,
                [r.poly for r in rescaled],
                problem.margins,
                [d_target] * len(rescaled),
                s.moment_method,
                None,
                s.max_total_degree,
                s.term_cap,
                s.entry_cap,
            )
            diagnostics["moments_s"] = time.perf_counter() - start
            diagnostics["moment_method"] = mixed.method
            validity = mixed_validity_degree(mixed)
            d_used = self._settle_degree(d_target, validity)
        except MomentInstability:
            raise
        except Exception as e:
            raise StageError("moments", e) from e

        try:
            start = time.perf_counter()
            pairs = await asyncio.gather(
                *(self.certificate(IntervalSet.single(r.lower, r.upper), d_used, solve_missing) for r in rescaled)
            )
            offline_s = time.perf_counter() - start
        except LookupError:
            raise
        except Exception as e:
            raise StageError("certificates", e) from e

        try:
            start = time.perf_counter()
            trimmed = MixedChebMoments(mixed.values[tuple(slice(0, d_used + 1) for _ in rescaled)], mixed.method)
            raw_u, p_u = upper_bound_multi([cert for _, cert in pairs], trimmed)
            online_s = time.perf_counter() - start
        except Exception as e:
            raise StageError("contract", e) from e

        diagnostics["raw_p_u"] = raw_u
        event = clamp_probability(raw_u, "p_u")[1]
        if event:
            diagnostics["clamp_events"].append(event)
        diagnostics["upper_only"] = True
        logger.info("risk upper bound %.4f at d=%d for %d constraints", p_u, d_used, problem.ell)
        return RiskBounds(
            p_l=0.0, p_u=p_u, degree_requested=d_requested, degree_used=d_used, validity_degree=validity,
            certificate_ids=[key for key, _ in pairs], offline_s=offline_s, online_s=online_s,
            upper_only=True, diagnostics=diagnostics,
        )

    def bounds_from_moments(
        self, cert_k: IndicatorCertificate, cert_kbar: IndicatorCertificate, mz: MomentVector
    ) -> RiskBounds:
        """The online step alone: two dot products against precomputed moments."""
        start = time.perf_counter()
        degree = max(cert_k.degree, cert_kbar.degree)
        raw_u, p_u = upper_bound_single(cert_k, mz)
        raw_l, p_l = lower_bound_single(cert_kbar, mz)
        online_s = time.perf_counter() - start
        return RiskBounds(
            p_l=min(p_l, p_u), p_u=p_u, degree_requested=degree, degree_used=degree,
            validity_degree=moment_validity_degree(mz), online_s=online_s,
            diagnostics={"raw_p_u": raw_u, "raw_p_l": raw_l, "clamp_events": []},
        )

    async def auto_degree(self, problem: RiskProblem, ceiling: int = 100, solve_missing: bool = True) -> int:
        """Raise d in steps until the moment validity degree or the time budget binds."""
        s = self.settings
        box = problem.support_box()
        rescaled = [rescale_constraint(c.poly, c.lower, c.upper, box, s.bound_method) for c in problem.constraints]
        if problem.ell == 1:
            mz = await asyncio.to_thread(self._moments, rescaled[0].poly, problem.margins, ceiling)
            validity = moment_validity_degree(mz)
        else:
            top = min(ceiling, int(s.entry_cap ** (1.0 / problem.ell)) - 1)
            mixed = await asyncio.to_thread(
                mixed_cheb_moments, [r.poly for r in rescaled], problem.margins, [top] * problem.ell,
                s.moment_method, None, s.max_total_degree, s.term_cap, s.entry_cap,
            )
            validity = mixed_validity_degree(mixed)
        limit = _floor_even(min(ceiling, validity))

        chosen = min(even_degree(s.auto_degree_start), limit)
        start = time.perf_counter()
        d = chosen
        while d <= limit:
            targets = [IntervalSet.single(r.lower, r.upper) for r in rescaled]
            if problem.ell == 1:
                targets.append(complement(targets[0]))
            await asyncio.gather(*(self.certificate(t, d, solve_missing) for t in targets))
            chosen = d
            if time.perf_counter() - start > s.auto_degree_budget_s:
                logger.info("degree search stopped by the %.0fs budget at d=%d", s.auto_degree_budget_s, d)
                break
            d += even_degree(s.auto_degree_step)
        logger.info("auto degree picked d=%d (moment validity %d)", chosen, validity)
        return max(chosen, 0)


async def sweep_rows(
    estimator: RiskEstimator,
    problem: RiskProblem,
    degrees: Sequence[int] = SWEEP_DEGREES,
    reference: Optional[Dict[int, Tuple[float, float]]] = None,
) -> List[Dict[str, Any]]:
    """Bounds for each degree next to the published (p_u, p_l) and their differences."""
    reference = SWEEP_REFERENCE if reference is None else reference
    rows = []
    for d in degrees:
        b = await estimator.estimate(problem, d)
        ref_u, ref_l = reference.get(d, (None, None))
        rows.append({
            "d": d,
            "p_u": round(b.p_u, 6),
            "p_l": round(b.p_l, 6),
            "ref_p_u": ref_u,
            "ref_p_l": ref_l,
            "delta_u": None if ref_u is None else round(b.p_u - ref_u, 6),
            "delta_l": None if ref_l is None else round(b.p_l - ref_l, 6),
        })
    return rows
