"""Errors raised by the SDP solver and the certificate store."""

from typing import Any, Dict, Optional


class SolverFailure(RuntimeError):
    """Raised when an SDP solve ends without a usable certificate."""

    def __init__(self, message: str, status: str = "numerical", residuals: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.status = status
        self.residuals = residuals or {}


class MissingCertificate(LookupError):
    """Raised when a certificate is not cached and solving on demand is disabled."""

    def __init__(self, key: str, description: str = ""):
        super().__init__(f"certificate {key[:12]} not in cache{': ' + description if description else ''}")
        self.key = key
