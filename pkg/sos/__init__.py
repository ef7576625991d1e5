"""Univariate SOS indicator approximations and the dense SDP solver behind them."""

from .errors import MissingCertificate, SolverFailure
from .indicator import (
    GramLayout,
    IndicatorCertificate,
    approximate_indicator,
    build_sdp,
    degree_sweep,
    even_degree,
    interval_factor,
)
from .intervals import IntervalSet, complement
from .sdp import SdpProblem, SdpSolution, SolverConfig, solve, verify
from .store import CertificateStore, certificate_key
from .validators import AuditTolerances, CertificateReport, CertificateValidator, validate_certificate

__all__ = [
    "AuditTolerances",
    "CertificateReport",
    "CertificateStore",
    "CertificateValidator",
    "GramLayout",
    "IndicatorCertificate",
    "IntervalSet",
    "MissingCertificate",
    "SdpProblem",
    "SdpSolution",
    "SolverConfig",
    "SolverFailure",
    "approximate_indicator",
    "build_sdp",
    "certificate_key",
    "complement",
    "degree_sweep",
    "even_degree",
    "interval_factor",
    "solve",
    "validate_certificate",
    "verify",
]
