"""Dense primal-dual interior-point solver for small block SDPs with a free vector.

Primal::

    minimize   sum_k <C_k, X_k> + c_free . x
    subject to sum_k A_k(X_k) + B x = b,   X_k PSD,  x free

where A_k(X)_i = <A_k[i], X>. Dual::

    maximize   b . y
    subject to S_k = C_k - sum_i y_i A_k[i] PSD,   B^T y = c_free

Search directions are HKM (X dS S^-1 form) with an optional Mehrotra
predictor-corrector; steps stop short of the PSD boundary by ``step_frac``.
Each Schur solve is refined against the primal residual of the assembled
direction, so A(dX) + B dx tracks the right-hand side to working precision
even when the Schur matrix is badly conditioned near the optimum. Problems
without a free vector factor the Schur matrix by Cholesky.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import (
    LinAlgError,
    cho_factor,
    cho_solve,
    eigh,
    eigvalsh,
    lu_factor,
    lu_solve,
    solve_triangular,
)

logger = logging.getLogger(__name__)

DIVERGENCE_NORM = 1e12
MIN_STEP = 1e-10

STATUSES = ("optimal", "max_iter", "infeasible", "numerical")


class SolverConfig(BaseModel):
    """Interior-point tolerances and limits."""

    tol_gap: float = Field(default=1e-8, gt=0)
    tol_feas: float = Field(default=1e-9, gt=0)
    max_iter: int = Field(default=100, ge=1)
    step_frac: float = Field(default=0.98, gt=0, lt=1)
    predictor_corrector: bool = True
    sigma: float = Field(default=0.1, gt=0, lt=1)
    tol_psd: float = Field(default=1e-7, ge=0)
    refine_steps: int = Field(default=2, ge=0)
    max_block: int = 200
    max_constraints: int = 5000

    def profile_hash(self) -> str:
        """Short content hash of the tolerance profile."""
        payload = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class SdpProblem:
    """Block SDP data; ``A[k]`` has shape (m, n_k, n_k), ``B`` has shape (m, n_free).

    ``B`` and ``c_free`` may be None for a pure PSD problem.
    """

    A: List[np.ndarray]
    C: List[np.ndarray]
    B: Optional[np.ndarray]
    c_free: Optional[np.ndarray]
    b: np.ndarray
    block_names: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.b.size
        if self.B is None:
            self.B = np.zeros((m, 0))
        self.B = np.asarray(self.B, dtype=float).reshape(m, -1)
        self.c_free = np.zeros(0) if self.c_free is None else np.asarray(self.c_free, dtype=float).ravel()
        if self.c_free.size != self.B.shape[1]:
            raise ValueError("free objective length differs from the free column count")
        if len(self.A) != len(self.C):
            raise ValueError("one objective matrix per block is required")
        self.A = [np.asarray(a, dtype=float) for a in self.A]
        self.C = [np.asarray(c, dtype=float) for c in self.C]
        for k, (a, c) in enumerate(zip(self.A, self.C)):
            if a.ndim != 3 or a.shape[0] != m or a.shape[1] != a.shape[2] or c.shape != a.shape[1:]:
                raise ValueError(f"block {k} has inconsistent dimensions")
            if not np.allclose(a, a.transpose(0, 2, 1)) or not np.allclose(c, c.T):
                raise ValueError(f"block {k} data must be symmetric")
        if not all(np.all(np.isfinite(x)) for x in [self.b, self.B, self.c_free, *self.A, *self.C]):
            raise ValueError("SDP data must be finite")
        if m > self.n_scalar:
            raise ValueError(f"{m} equalities exceed the {self.n_scalar} scalar variables")
        if not self.block_names:
            self.block_names = [f"block{k}" for k in range(len(self.A))]

    @property
    def n_constraints(self) -> int:
        return int(self.b.size)

    @property
    def block_sizes(self) -> List[int]:
        return [a.shape[1] for a in self.A]

    @property
    def n_free(self) -> int:
        return int(self.B.shape[1])

    @property
    def n_scalar(self) -> int:
        return sum(n * (n + 1) // 2 for n in self.block_sizes) + self.n_free

    def apply(self, X: Sequence[np.ndarray], x: np.ndarray) -> np.ndarray:
        """sum_k A_k(X_k) + B x."""
        out = self.B @ x
        for a, blk in zip(self.A, X):
            out = out + np.tensordot(a, blk, axes=([1, 2], [0, 1]))
        return out

    def adjoint(self, y: np.ndarray) -> List[np.ndarray]:
        """[sum_i y_i A_k[i] for each block k]."""
        return [np.tensordot(y, a, axes=(0, 0)) for a in self.A]

    def to_triplets(self) -> List[Tuple[int, int, int, int, float]]:
        """Sparse (constraint, block, row, col, value) entries, upper triangle only.

        Constraint 0 is the objective; blocks are numbered from 1 and the free
        vector is the last block, stored on its diagonal.
        """
        out: List[Tuple[int, int, int, int, float]] = []
        for k, (a, c) in enumerate(zip(self.A, self.C), start=1):
            rows, cols = np.triu_indices(c.shape[0])
            for r, s in zip(rows, cols):
                if c[r, s] != 0.0:
                    out.append((0, k, int(r) + 1, int(s) + 1, float(c[r, s])))
            for i in range(self.n_constraints):
                vals = a[i][rows, cols]
                for r, s, v in zip(rows[vals != 0.0], cols[vals != 0.0], vals[vals != 0.0]):
                    out.append((i + 1, k, int(r) + 1, int(s) + 1, float(v)))
        free_block = len(self.A) + 1
        for j in np.flatnonzero(self.c_free):
            out.append((0, free_block, int(j) + 1, int(j) + 1, float(self.c_free[j])))
        for i, j in zip(*np.nonzero(self.B)):
            out.append((int(i) + 1, free_block, int(j) + 1, int(j) + 1, float(self.B[i, j])))
        return out

    def write_triplets(self, path: Path) -> None:
        """Plain-text dump: a header, the right-hand side, then one triplet per line."""
        lines = [
            f"# constraints {self.n_constraints}",
            f"# blocks {' '.join(str(n) for n in self.block_sizes)} free {self.n_free}",
            "# rhs " + " ".join(float(v).hex() for v in self.b),
        ]
        lines.extend(f"{c} {k} {r} {s} {v!r}" for c, k, r, s, v in self.to_triplets())
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class SdpSolution:
    X: List[np.ndarray]
    x: np.ndarray
    y: np.ndarray
    S: List[np.ndarray]
    status: str
    iterations: int
    primal_objective: float
    dual_objective: float
    residuals: Dict[str, float]

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"

    @property
    def dual_multipliers(self) -> np.ndarray:
        return self.y


def _max_step(M: np.ndarray, dM: np.ndarray) -> float:
    """Largest alpha with M + alpha dM PSD (inf if dM keeps it PSD)."""
    L = np.linalg.cholesky(M)
    W = solve_triangular(L, solve_triangular(L, dM, lower=True).T, lower=True)
    lam = eigvalsh(0.5 * (W + W.T))
    return np.inf if lam[0] >= 0 else -1.0 / lam[0]


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


class _SchurSystem:
    """Factored [[M, B], [B^T, 0]]; plain Cholesky of M when B has no columns."""

    def __init__(self, M: np.ndarray, B: np.ndarray):
        self.m, self.nf = B.shape
        self._cho = None
        self._lu = None
        if self.nf == 0:
            try:
                self._cho = cho_factor(M, lower=True, check_finite=True)
            except LinAlgError:
                self._lu = lu_factor(M, check_finite=True)
            return
        kkt = np.zeros((self.m + self.nf, self.m + self.nf))
        kkt[: self.m, : self.m] = M
        kkt[: self.m, self.m :] = B
        kkt[self.m :, : self.m] = B.T
        self._lu = lu_factor(kkt, check_finite=True)

    def solve(self, h: np.ndarray, f: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self._cho is not None:
            return cho_solve(self._cho, h), np.zeros(0)
        sol = lu_solve(self._lu, np.concatenate([h, f]))
        return sol[: self.m], sol[self.m :]


class _State:
    def __init__(self, X: List[np.ndarray], S: List[np.ndarray], y: np.ndarray, x: np.ndarray):
        self.X, self.S, self.y, self.x = X, S, y, x


def _initial_point(p: SdpProblem) -> _State:
    X, S = [], []
    for a, c in zip(p.A, p.C):
        n = a.shape[1]
        norms = np.linalg.norm(a.reshape(a.shape[0], -1), axis=1)
        xi = max(10.0, np.sqrt(n), n * float(np.max((1.0 + np.abs(p.b)) / (1.0 + norms))))
        eta = max(10.0, np.sqrt(n), float(max(np.linalg.norm(c), norms.max(initial=0.0))))
        X.append(xi * np.eye(n))
        S.append(eta * np.eye(n))
    return _State(X, S, np.zeros(p.n_constraints), np.zeros(p.n_free))


def _residuals(p: SdpProblem, st: _State) -> Tuple[np.ndarray, List[np.ndarray], np.ndarray]:
    rp = p.b - p.apply(st.X, st.x)
    ATy = p.adjoint(st.y)
    Rd = [c - aty - s for c, aty, s in zip(p.C, ATy, st.S)]
    rf = p.c_free - p.B.T @ st.y
    return rp, Rd, rf


def _objectives(p: SdpProblem, st: _State) -> Tuple[float, float]:
    pobj = sum(float(np.sum(c * x)) for c, x in zip(p.C, st.X)) + float(p.c_free @ st.x)
    return pobj, float(p.b @ st.y)


def solve(problem: SdpProblem, cfg: Optional[SolverConfig] = None) -> SdpSolution:
    """Run the interior-point method; the status reports how it ended."""
    cfg = cfg or SolverConfig()
    if max(problem.block_sizes, default=0) > cfg.max_block:
        raise ValueError(f"block side {max(problem.block_sizes)} exceeds cap {cfg.max_block}")
    if problem.n_constraints > cfg.max_constraints:
        raise ValueError(f"{problem.n_constraints} equalities exceed cap {cfg.max_constraints}")

    p = problem
    m = p.n_constraints
    n_total = sum(p.block_sizes)
    st = _initial_point(p)
    norm_b = np.linalg.norm(p.b)
    norm_c = np.sqrt(sum(np.linalg.norm(c) ** 2 for c in p.C) + np.linalg.norm(p.c_free) ** 2)
    status = "max_iter"
    res: Dict[str, float] = {}
    it = 0

    for it in range(1, cfg.max_iter + 1):
        rp, Rd, rf = _residuals(p, st)
        pobj, dobj = _objectives(p, st)
        mu = sum(float(np.sum(x * s)) for x, s in zip(st.X, st.S)) / max(n_total, 1)
        res = {
            "primal_inf": float(np.linalg.norm(rp) / (1.0 + norm_b)),
            "dual_inf": float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in Rd) + np.linalg.norm(rf) ** 2) / (1.0 + norm_c)),
            "gap": float(abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))),
            "mu": float(mu),
        }
        logger.debug(
            "iter %3d pobj %+.10e dobj %+.10e pinf %.2e dinf %.2e gap %.2e",
            it, pobj, dobj, res["primal_inf"], res["dual_inf"], res["gap"],
        )
        if res["primal_inf"] < cfg.tol_feas and res["dual_inf"] < cfg.tol_feas and res["gap"] < cfg.tol_gap:
            status = "optimal"
            it -= 1
            break
        size = max(np.linalg.norm(st.y), max(np.linalg.norm(x) for x in st.X) if st.X else 0.0, np.linalg.norm(st.x))
        if not np.isfinite(size) or size > DIVERGENCE_NORM:
            status = "infeasible"
            break

        try:
            Sinv = [_sym(np.linalg.inv(s)) for s in st.S]
            M = np.zeros((m, m))
            for a, x, si in zip(p.A, st.X, Sinv):
                n = a.shape[1]
                M += (a @ x).reshape(m, n * n) @ (si @ a).reshape(m, n * n).T
            schur = _SchurSystem(_sym(M), p.B)

            def assemble(targets: List[np.ndarray], dy: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
                ATdy = p.adjoint(dy)
                dS = [rd - aty for rd, aty in zip(Rd, ATdy)]
                dX = [_sym(t + x @ aty @ si) for t, x, aty, si in zip(targets, st.X, ATdy, Sinv)]
                return dX, dS

            def mismatch(dX: List[np.ndarray], dx: np.ndarray, dy: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
                e = rp - p.apply(dX, dx)
                ef = rf - p.B.T @ dy
                return e, ef, float(np.sqrt(e @ e + ef @ ef))

            def direction(sigma: float, G: Optional[List[np.ndarray]]) -> Tuple[List[np.ndarray], List[np.ndarray], np.ndarray, np.ndarray]:
                targets = []
                h = rp.copy()
                for k, (a, x, si, rd) in enumerate(zip(p.A, st.X, Sinv, Rd)):
                    extra = x @ rd if G is None else x @ rd + G[k]
                    t = sigma * mu * si - x - extra @ si
                    targets.append(t)
                    h -= np.tensordot(a, _sym(t), axes=([1, 2], [0, 1]))
                dy, dx = schur.solve(h, rf)
                dX, dS = assemble(targets, dy)
                e, ef, err = mismatch(dX, dx, dy)
                for _ in range(cfg.refine_steps):
                    if err == 0.0:
                        break
                    cy, cx = schur.solve(e, ef)
                    new_dy, new_dx = dy + cy, dx + cx
                    new_dX, new_dS = assemble(targets, new_dy)
                    new_e, new_ef, new_err = mismatch(new_dX, new_dx, new_dy)
                    if new_err >= err:
                        break
                    dy, dx, dX, dS = new_dy, new_dx, new_dX, new_dS
                    e, ef, err = new_e, new_ef, new_err
                return dX, dS, dy, dx

            def steps(dX: List[np.ndarray], dS: List[np.ndarray]) -> Tuple[float, float]:
                ap = min([1.0] + [cfg.step_frac * _max_step(x, d) for x, d in zip(st.X, dX)])
                ad = min([1.0] + [cfg.step_frac * _max_step(s, d) for s, d in zip(st.S, dS)])
                return ap, ad

            if cfg.predictor_corrector:
                dXa, dSa, _, _ = direction(0.0, None)
                ap, ad = steps(dXa, dSa)
                mu_aff = sum(
                    float(np.sum((x + ap * dx) * (s + ad * ds)))
                    for x, dx, s, ds in zip(st.X, dXa, st.S, dSa)
                ) / max(n_total, 1)
                sigma = min(1.0, max(0.0, mu_aff / mu) ** 3) if mu > 0 else 0.0
                G = [dx @ ds for dx, ds in zip(dXa, dSa)]
                dX, dS, dy, dx = direction(sigma, G)
            else:
                dX, dS, dy, dx = direction(cfg.sigma, None)
            ap, ad = steps(dX, dS)
        except (LinAlgError, np.linalg.LinAlgError, ValueError) as exc:
            logger.debug("interior point stopped on a linear algebra failure: %s", exc)
            status = "numerical"
            break

        if ap < MIN_STEP and ad < MIN_STEP:
            status = "numerical"
            break
        st.X = [_sym(x + ap * d) for x, d in zip(st.X, dX)]
        st.x = st.x + ap * dx
        st.y = st.y + ad * dy
        st.S = [_sym(s + ad * d) for s, d in zip(st.S, dS)]
    else:
        it = cfg.max_iter

    pobj, dobj = _objectives(p, st)
    logger.debug("SDP finished: status %s after %d iterations, objective %.10g", status, it, pobj)
    return SdpSolution(
        X=st.X, x=st.x, y=st.y, S=st.S, status=status, iterations=it,
        primal_objective=pobj, dual_objective=dobj, residuals=res,
    )


def verify(problem: SdpProblem, solution: SdpSolution) -> Dict[str, float]:
    """Re-substitute a solution into the problem data, independent of solver internals."""
    p = problem
    eq = p.apply(solution.X, solution.x) - p.b
    S = [c - aty for c, aty in zip(p.C, p.adjoint(solution.y))]
    pobj = sum(float(np.sum(c * x)) for c, x in zip(p.C, solution.X)) + float(p.c_free @ solution.x)
    dobj = float(p.b @ solution.y)
    return {
        "equality_max": float(np.max(np.abs(eq))) if eq.size else 0.0,
        "free_dual_max": float(np.max(np.abs(p.B.T @ solution.y - p.c_free))) if p.n_free else 0.0,
        "primal_min_eig": min((float(eigh(_sym(x), eigvals_only=True)[0]) for x in solution.X), default=0.0),
        "dual_min_eig": min((float(eigh(_sym(s), eigvals_only=True)[0]) for s in S), default=0.0),
        "primal_objective": pobj,
        "dual_objective": dobj,
        "gap": pobj - dobj,
    }

