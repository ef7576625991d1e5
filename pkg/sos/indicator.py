"""Polynomial upper approximations of interval indicators by univariate SOS.

For a target set K (a union of intervals in [-1, 1]) and even degree d, find
the Chebyshev series p of degree d minimising the integral of p over [-1, 1]
subject to p >= 1 on K and p >= 0 on [-1, 1]. Each interval condition uses
the even-degree Lukacs form

    p - 1 = s_0 + (z - a)(b - z) s_1          on [a, b]
    p     = s_2 + (1 - z^2) s_3               on [-1, 1]

with s_i = v^T Q_i v, v = (T_0, ..., T_r) (or T_{r-1} for the multiplier
terms) and r = d / 2.
"""

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from polynomials import (
    ChebSeries,
    cheb_integral,
    cheb_integral_weights,
    cheb_linear_factor_matrix,
    gram_to_cheb_maps,
)

from .errors import SolverFailure
from .intervals import IntervalSet
from .sdp import SdpProblem, SdpSolution, SolverConfig, solve
from .validators import AuditTolerances, validate_certificate

logger = logging.getLogger(__name__)


def interval_factor(a: float, b: float) -> ChebSeries:
    """(z - a)(b - z) = -ab - 1/2 + (a + b) T_1 - T_2 / 2."""
    return ChebSeries(np.array([-a * b - 0.5, a + b, -0.5]))


def even_degree(d: int) -> int:
    if d < 0:
        raise ValueError("degree must be non-negative")
    return d + (d % 2)


@dataclass
class GramLayout:
    """Which Lukacs pair each Gram block belongs to."""

    degree: int
    pieces: List[Tuple[str, float, float, float]] = field(default_factory=list)

    @property
    def block_names(self) -> List[str]:
        names: List[str] = []
        r = self.degree // 2
        for label, _, _, _ in self.pieces:
            names.append(f"{label}.s0")
            if r > 0:
                names.append(f"{label}.s1")
        return names


def _piece_blocks(
    d: int, a: float, b: float
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Coefficient maps of s_0 and of (z - a)(b - z) s_1 onto T_0..T_d."""
    r = d // 2
    E0 = gram_to_cheb_maps(r + 1)
    if r == 0:
        return E0, None
    L = cheb_linear_factor_matrix(interval_factor(a, b), 2 * r - 2)
    F = np.tensordot(L, gram_to_cheb_maps(r), axes=(1, 0))
    return E0, F


def _pair_coefficients(d: int, a: float, b: float, s0: np.ndarray, s1: Optional[np.ndarray]) -> np.ndarray:
    """Chebyshev coefficients of s_0 + (z - a)(b - z) s_1 from its Gram blocks."""
    E0, F = _piece_blocks(d, a, b)
    coeffs = np.tensordot(E0, s0, axes=([1, 2], [0, 1]))
    if F is not None and s1 is not None:
        coeffs = coeffs + np.tensordot(F, s1, axes=([1, 2], [0, 1]))
    return coeffs


def build_sdp(target: IntervalSet, d: int) -> Tuple[SdpProblem, GramLayout]:
    """SDP data for the indicator approximation of ``target`` at degree ``d``.

    The box pair defines p itself, p = s_2 + (1 - z^2) s_3, so every target
    interval contributes the equalities box pair - target pair = 1 (on T_0)
    and the objective is the integral of the box pair. The result is a pure
    PSD problem with no free vector. Odd ``d`` is rounded up to the next even
    degree.
    """
    if target.is_empty:
        raise ValueError("an empty target needs no SDP")
    d_even = even_degree(d)
    if d_even != d:
        logger.warning("odd degree %d rounded up to %d", d, d_even)
    d = d_even
    n = d + 1
    layout = GramLayout(d)
    for i, (a, b) in enumerate(target):
        layout.pieces.append((f"K{i}", a, b, 1.0))
    layout.pieces.append(("box", -1.0, 1.0, 0.0))

    n_targets = len(layout.pieces) - 1
    m = n * n_targets
    A: List[np.ndarray] = []
    C: List[np.ndarray] = []
    rhs = np.zeros(m)
    for g, (_, a, b, floor) in enumerate(layout.pieces[:-1]):
        rows = slice(g * n, (g + 1) * n)
        rhs[g * n] = floor
        for maps in _piece_blocks(d, a, b):
            if maps is None:
                continue
            blk = np.zeros((m, maps.shape[1], maps.shape[2]))
            blk[rows] = -maps
            A.append(blk)
            C.append(np.zeros(maps.shape[1:]))
    weights = cheb_integral_weights(n)
    for maps in _piece_blocks(d, -1.0, 1.0):
        if maps is None:
            continue
        A.append(np.tile(maps, (n_targets, 1, 1)))
        C.append(np.tensordot(weights, maps, axes=(0, 0)))
    problem = SdpProblem(A=A, C=C, B=None, c_free=None, b=rhs, block_names=layout.block_names)
    return problem, layout


@dataclass
class IndicatorCertificate:
    """Solved SOS certificate p >= I_target on [-1, 1]."""

    target: IntervalSet
    degree: int
    coeffs: ChebSeries
    gram_blocks: List[np.ndarray] = field(default_factory=list)
    block_names: List[str] = field(default_factory=list)
    objective_value: float = 0.0
    solver_status: str = "trivial"
    residuals: Dict[str, float] = field(default_factory=dict)
    degree_requested: int = 0
    solve_seconds: float = 0.0
    iterations: int = 0
    solver_profile: str = ""
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @classmethod
    def zero(cls, target: IntervalSet, degree: int) -> "IndicatorCertificate":
        """Certificate of an empty target: the zero polynomial."""
        return cls(target=target, degree=degree, coeffs=ChebSeries(np.zeros(degree + 1)), degree_requested=degree)

    def __call__(self, z: Any) -> Any:
        return self.coeffs(z)

    def reconstruct(self) -> List[ChebSeries]:
        """The polynomial rebuilt from each Lukacs pair of Gram blocks."""
        if not self.gram_blocks:
            return []
        blocks = dict(zip(self.block_names, self.gram_blocks))
        pieces = [(f"K{i}", a, b, 1.0) for i, (a, b) in enumerate(self.target)] + [("box", -1.0, 1.0, 0.0)]
        out = []
        for label, a, b, floor in pieces:
            coeffs = _pair_coefficients(self.degree, a, b, blocks[f"{label}.s0"], blocks.get(f"{label}.s1"))
            coeffs[0] += floor
            out.append(ChebSeries(coeffs))
        return out

    def to_document(self) -> Dict[str, Any]:
        """JSON-ready form; floats are stored as hex strings for an exact reload."""
        return {
            "target": self.target.to_list(),
            "degree": self.degree,
            "degree_requested": self.degree_requested,
            "coeffs": [float(c).hex() for c in self.coeffs.coeffs],
            "gram_blocks": {
                name: [[float(v).hex() for v in row] for row in blk]
                for name, blk in zip(self.block_names, self.gram_blocks)
            },
            "block_names": list(self.block_names),
            "objective": float(self.objective_value).hex(),
            "solver_status": self.solver_status,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "solve_seconds": self.solve_seconds,
            "iterations": self.iterations,
            "solver_cfg_hash": self.solver_profile,
            "created_at": self.created_at,
        }

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "IndicatorCertificate":
        names = list(doc.get("block_names", []))
        grams = doc.get("gram_blocks", {})
        return cls(
            target=IntervalSet.from_pairs(doc["target"]),
            degree=int(doc["degree"]),
            coeffs=ChebSeries(np.array([float.fromhex(c) for c in doc["coeffs"]])),
            gram_blocks=[np.array([[float.fromhex(v) for v in row] for row in grams[n]]) for n in names],
            block_names=names,
            objective_value=float.fromhex(doc["objective"]),
            solver_status=doc.get("solver_status", "unknown"),
            residuals=dict(doc.get("residuals", {})),
            degree_requested=int(doc.get("degree_requested", doc["degree"])),
            solve_seconds=float(doc.get("solve_seconds", 0.0)),
            iterations=int(doc.get("iterations", 0)),
            solver_profile=doc.get("solver_cfg_hash", ""),
            created_at=doc.get("created_at", ""),
        )


def certificate_from_solution(
    target: IntervalSet,
    degree: int,
    problem: SdpProblem,
    solution: SdpSolution,
    degree_requested: int,
    profile: str = "",
) -> IndicatorCertificate:
    blocks = dict(zip(problem.block_names, solution.X))
    coeffs = ChebSeries(_pair_coefficients(degree, -1.0, 1.0, blocks["box.s0"], blocks.get("box.s1")))
    return IndicatorCertificate(
        target=target,
        degree=degree,
        coeffs=coeffs,
        gram_blocks=[blk.copy() for blk in solution.X],
        block_names=list(problem.block_names),
        objective_value=cheb_integral(coeffs),
        solver_status=solution.status,
        residuals={**solution.residuals, "solver_objective": solution.primal_objective},
        degree_requested=degree_requested,
        iterations=solution.iterations,
        solver_profile=profile,
    )


def approximate_indicator(
    target: IntervalSet,
    d: int,
    cfg: Optional[SolverConfig] = None,
    audit: Optional[AuditTolerances] = None,
) -> IndicatorCertificate:
    """Solve for the degree-``d`` indicator approximation of ``target``.

    A non-optimal solve is still accepted when the independent audit passes;
    otherwise :class:`SolverFailure` carries the residuals.
    """
    cfg = cfg or SolverConfig()
    audit = audit or AuditTolerances()
    d_used = even_degree(d)
    if target.is_empty:
        logger.info("empty target at degree %d: zero certificate", d_used)
        cert = IndicatorCertificate.zero(target, d_used)
        cert.degree_requested = d
        cert.solver_profile = cfg.profile_hash()
        return cert

    start = time.perf_counter()
    problem, _ = build_sdp(target, d)
    solution = solve(problem, cfg)
    cert = certificate_from_solution(target, d_used, problem, solution, d, cfg.profile_hash())
    cert.solve_seconds = time.perf_counter() - start

    report = validate_certificate(cert, audit.grid_n, audit)
    cert.residuals.update(report.as_residuals())
    ok, message = report.is_valid()
    logger.info(
        "solved indicator of %s at d=%d: status %s, %d iterations, objective %.8f, %.2fs",
        target, d_used, solution.status, solution.iterations, cert.objective_value, cert.solve_seconds,
    )
    if not ok:
        raise SolverFailure(
            f"certificate for {target} at d={d_used} failed its audit: {message}",
            solution.status,
            cert.residuals,
        )
    if not solution.is_optimal:
        logger.warning("solver ended with status %s but the certificate passed its audit", solution.status)
    return cert


def degree_sweep(
    target: IntervalSet,
    degrees: Sequence[int],
    cfg: Optional[SolverConfig] = None,
    audit: Optional[AuditTolerances] = None,
) -> List[IndicatorCertificate]:
    """Certificates for each degree in ``degrees`` (same target)."""
    return [approximate_indicator(target, d, cfg, audit) for d in degrees]
