"""A posteriori audit of indicator certificates, independent of the solver."""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.linalg import eigvalsh

from polynomials import cheb_integral

if TYPE_CHECKING:
    from .indicator import IndicatorCertificate


class AuditTolerances(BaseModel):
    tol_feas: float = Field(default=1e-6, gt=0)
    tol_psd: float = Field(default=1e-7, ge=0)
    tol_recon: float = Field(default=1e-7, gt=0)
    tol_objective: float = Field(default=1e-6, gt=0)
    grid_n: int = Field(default=10_000, ge=1000)


@dataclass
class CertificateReport:
    metrics: Dict[str, float] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def grid_violation(self) -> float:
        return self.metrics.get("grid_violation", 0.0)

    def is_valid(self) -> Tuple[bool, Optional[str]]:
        if self.failures:
            return False, "; ".join(self.failures)
        return True, None

    def as_residuals(self) -> Dict[str, float]:
        return dict(self.metrics)


Rule = Callable[["IndicatorCertificate", Dict[str, float]], Tuple[bool, Optional[str]]]


class CertificateValidator:
    """Checks a certificate against its defining inequalities on dense grids."""

    def __init__(self, tolerances: Optional[AuditTolerances] = None, grid_n: Optional[int] = None):
        self.tolerances = tolerances or AuditTolerances()
        self.grid_n = grid_n or self.tolerances.grid_n
        if self.grid_n < 1000:
            raise ValueError("audit grids need at least 1000 points")
        self.validation_rules: Dict[str, Rule] = {
            "box": self.validate_box_floor,
            "target": self.validate_target_floor,
            "psd": self.validate_gram_psd,
            "reconstruction": self.validate_reconstruction,
            "objective": self.validate_objective,
        }

    def validate(self, cert: "IndicatorCertificate") -> CertificateReport:
        report = CertificateReport()
        for name, rule in self.validation_rules.items():
            ok, message = rule(cert, report.metrics)
            if not ok:
                report.failures.append(f"{name}: {message}")
        report.metrics["grid_violation"] = max(
            0.0, -report.metrics.get("min_box", 0.0), -report.metrics.get("min_target", 0.0)
        )
        return report

    def validate_box_floor(self, cert: "IndicatorCertificate", metrics: Dict[str, float]) -> Tuple[bool, Optional[str]]:
        """p >= 0 on [-1, 1]."""
        z = np.linspace(-1.0, 1.0, self.grid_n)
        low = float(np.min(cert(z)))
        metrics["min_box"] = low
        if low < -self.tolerances.tol_feas:
            return False, f"p dips to {low:.3e} on [-1, 1]"
        return True, None

    def validate_target_floor(self, cert: "IndicatorCertificate", metrics: Dict[str, float]) -> Tuple[bool, Optional[str]]:
        """p - 1 >= 0 on every target interval."""
        low = np.inf
        for a, b in cert.target:
            z = np.linspace(a, b, self.grid_n)
            low = min(low, float(np.min(cert(z))) - 1.0)
        metrics["min_target"] = 0.0 if low == np.inf else low
        if low < -self.tolerances.tol_feas:
            return False, f"p - 1 dips to {low:.3e} on the target"
        return True, None

    def validate_gram_psd(self, cert: "IndicatorCertificate", metrics: Dict[str, float]) -> Tuple[bool, Optional[str]]:
        floors = [float(eigvalsh(0.5 * (q + q.T))[0]) for q in cert.gram_blocks]
        floor = min(floors) if floors else 0.0
        metrics["gram_min_eig"] = floor
        if floor < -self.tolerances.tol_psd:
            return False, f"Gram eigenvalue {floor:.3e} below floor"
        return True, None

    def validate_reconstruction(self, cert: "IndicatorCertificate", metrics: Dict[str, float]) -> Tuple[bool, Optional[str]]:
        worst = 0.0
        for piece in cert.reconstruct():
            n = max(piece.coeffs.size, cert.coeffs.coeffs.size)
            worst = max(worst, float(np.max(np.abs(piece.padded(n) - cert.coeffs.padded(n)))))
        metrics["recon_residual"] = worst
        if worst > self.tolerances.tol_recon:
            return False, f"Gram reconstruction differs by {worst:.3e}"
        return True, None

    def validate_objective(self, cert: "IndicatorCertificate", metrics: Dict[str, float]) -> Tuple[bool, Optional[str]]:
        diff = abs(cheb_integral(cert.coeffs) - cert.objective_value)
        metrics["objective_residual"] = diff
        if diff > self.tolerances.tol_objective:
            return False, f"stored objective is off by {diff:.3e}"
        return True, None


def validate_certificate(
    cert: "IndicatorCertificate",
    grid_n: int = 10_000,
    tolerances: Optional[AuditTolerances] = None,
) -> CertificateReport:
    """Audit report for ``cert``; failures are listed, never raised."""
    return CertificateValidator(tolerances, grid_n).validate(cert)
