"""Runtime settings, read from the environment (and a .env file) with defaults."""

import logging
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from moments import MOMENT_METHODS
from polynomials import BOUND_METHODS, MAX_TOTAL_DEGREE, MAX_UNIVARIATE_DEGREE
from sos import AuditTolerances, SolverConfig

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601


class Settings(BaseModel):
    """Every tunable of the pipeline, the solver and the Monte-Carlo oracle.

    ``bound_method`` defaults to ``range``, the branch-and-bound enclosure of
    P on the support box, rather than the ``chebyshev`` coefficient sum that
    :func:`polynomials.box_bound` defaults to. The enclosure never exceeds
    that sum. ``CHEBRISK_BOUND_METHOD=chebyshev`` selects the coefficient sum.
    """

    cache_dir: str = "./certificates"
    log_level: str = "INFO"

    # interior point
    tol_gap: float = 1e-8
    tol_feas: float = 1e-9
    max_iter: int = 100
    step_frac: float = 0.98
    predictor_corrector: bool = True
    refine_steps: int = 2

    # certificate audit
    audit_tol_feas: float = 1e-6
    audit_tol_psd: float = 1e-7
    audit_tol_recon: float = 1e-7
    audit_grid_n: int = Field(default=10_000, ge=1000)

    # moments
    max_univariate_degree: int = MAX_UNIVARIATE_DEGREE
    max_total_degree: int = MAX_TOTAL_DEGREE
    term_cap: int = 250_000
    entry_cap: int = 200_000
    moment_method: str = "auto"
    bound_method: str = "range"
    strict_degree: bool = False
    cross_check_degree: int = 0

    # degree search
    auto_degree_start: int = 10
    auto_degree_step: int = 10
    auto_degree_budget_s: float = 300.0

    # Monte Carlo
    mc_seed: int = DEFAULT_SEED
    mc_samples: int = 1_000_000
    mc_workers: int = 1
    mc_ci_level: float = 0.99

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tol_gap=self.tol_gap,
            tol_feas=self.tol_feas,
            max_iter=self.max_iter,
            step_frac=self.step_frac,
            predictor_corrector=self.predictor_corrector,
            refine_steps=self.refine_steps,
        )

    def audit_tolerances(self) -> AuditTolerances:
        return AuditTolerances(
            tol_feas=self.audit_tol_feas,
            tol_psd=self.audit_tol_psd,
            tol_recon=self.audit_tol_recon,
            grid_n=self.audit_grid_n,
        )

    def check(self) -> None:
        if self.moment_method not in MOMENT_METHODS:
            raise ValueError(f"unknown moment method: {self.moment_method}")
        if self.bound_method not in BOUND_METHODS:
            raise ValueError(f"unknown bound method: {self.bound_method}")

    @classmethod
    def from_env(cls, env_file: Optional[str] = None) -> "Settings":
        """Defaults overridden by CHEBRISK_* environment variables."""
        load_dotenv(env_file)
        values = {}
        for name, field in cls.model_fields.items():
            raw = os.getenv(f"CHEBRISK_{name.upper()}")
            if raw is None:
                continue
            if field.annotation is bool:
                values[name] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                values[name] = raw
        settings = cls.model_validate(values)
        settings.check()
        return settings
