"""Errors raised by polynomial arithmetic and rescaling."""


class DegreeCapExceeded(ValueError):
    """Raised when an operation would produce a polynomial above the degree cap."""

    def __init__(self, degree: int, cap: int):
        super().__init__(f"degree {degree} exceeds cap {cap}")
        self.degree = degree
        self.cap = cap


class VariableMismatch(ValueError):
    """Raised when two polynomials are defined over different variable counts."""

    def __init__(self, left: int, right: int):
        super().__init__(f"variable count mismatch: {left} != {right}")
        self.left = left
        self.right = right


class EmptyUnsafeSet(ValueError):
    """Raised when a constraint can never be satisfied on the box."""
