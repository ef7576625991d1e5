"""Errors raised while computing moments."""

from typing import Any, Dict, Optional


class InsufficientMoments(ValueError):
    """Raised when an explicit moment table is shorter than the order requested."""

    def __init__(self, needed_order: int, available: int):
        super().__init__(
            f"moment of order {needed_order} requested but only orders 0..{available - 1} are known"
        )
        self.needed_order = needed_order
        self.available = available


class MomentBlowup(ValueError):
    """Raised when a moment computation would exceed the configured size caps."""

    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report or {}


class MomentInstability(ValueError):
    """Raised when Chebyshev moments leave [-1, 1] below the requested degree."""

    def __init__(self, requested: int, usable_degree: int):
        super().__init__(
            f"Chebyshev moments are unstable beyond degree {usable_degree} (requested {requested})"
        )
        self.requested = requested
        self.usable_degree = usable_degree
