"""Problem-file schema and semantic checks."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError

from moments import Marginal
from polynomials import MultiPoly

from .bounds import Constraint, RiskProblem

logger = logging.getLogger(__name__)

MAX_PROBLEM_DEGREE = 200


class VariableSpec(BaseModel):
    name: str
    marginal: Marginal


class TermSpec(BaseModel):
    exponents: List[int]
    coeff: float


class ConstraintSpec(BaseModel):
    poly: List[TermSpec]
    l: float
    u: float


class ReferenceValues(BaseModel):
    """Published values the problem is expected to reproduce."""

    p_l: Optional[float] = None
    p_u: Optional[float] = None
    mc: Optional[float] = None


class ProblemFile(BaseModel):
    """One risk problem: marginals of every variable and the constraint polynomials."""

    name: str = ""
    notes: str = ""
    variables: List[VariableSpec]
    constraints: List[ConstraintSpec]
    degree: int = Field(default=20, ge=0)
    reference: Optional[ReferenceValues] = None

    @classmethod
    def from_json(cls, text: str) -> "ProblemFile":
        return cls.model_validate_json(text)

    @classmethod
    def load(cls, path: Path) -> "ProblemFile":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def to_risk_problem(self, degree: Optional[int] = None) -> RiskProblem:
        nvars = self.nvars
        constraints = [
            Constraint(
                MultiPoly.from_terms(nvars, ((t.exponents, t.coeff) for t in c.poly)),
                c.l,
                c.u,
            )
            for c in self.constraints
        ]
        return RiskProblem(
            constraints=constraints,
            margins=[v.marginal for v in self.variables],
            degree=self.degree if degree is None else degree,
            name=self.name,
            variable_names=[v.name for v in self.variables],
        )


class ProblemValidator:
    """Semantic checks on a problem document, run before any numerical work."""

    def __init__(self):
        self.validation_rules = {
            "variables": self.validate_variables,
            "constraints": self.validate_constraints,
            "degree": self.validate_degree,
            "reference": self.validate_reference,
        }

    def validate_problem(self, data: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
        """Validate a parsed JSON problem document."""
        try:
            problem = ProblemFile.model_validate(data)
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"])
            return False, f"Schema error at {where}: {first['msg']}"

        for rule in self.validation_rules.values():
            ok, message = rule(problem)
            if not ok:
                return False, message
        return True, None

    def validate_file(self, path: Path) -> Tuple[bool, Optional[str]]:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            return False, f"Cannot read problem file {path}: {e}"
        return self.validate_problem(data)

    def validate_variables(self, problem: ProblemFile) -> Tuple[bool, Optional[str]]:
        if not problem.variables:
            return False, "Problem must declare at least one variable"
        names = [v.name for v in problem.variables]
        if len(set(names)) != len(names):
            return False, "Variable names must be unique"
        for v in problem.variables:
            if getattr(v.marginal, "support_assumed", False):
                logger.info("variable %s: Beta support not given, assuming [0, 1]", v.name)
        return True, None

    def validate_constraints(self, problem: ProblemFile) -> Tuple[bool, Optional[str]]:
        if not problem.constraints:
            return False, "Problem must have at least one constraint"
        for j, c in enumerate(problem.constraints):
            if c.l > c.u:
                return False, f"Constraint {j}: lower threshold {c.l} exceeds upper threshold {c.u}"
            if not c.poly:
                return False, f"Constraint {j}: polynomial has no terms"
            for term in c.poly:
                if len(term.exponents) != problem.nvars:
                    return False, (
                        f"Constraint {j}: exponent vector {term.exponents} does not match "
                        f"the {problem.nvars} declared variables"
                    )
                if any(e < 0 for e in term.exponents):
                    return False, f"Constraint {j}: exponents must be non-negative"
        return True, None

    def validate_degree(self, problem: ProblemFile) -> Tuple[bool, Optional[str]]:
        if problem.degree > MAX_PROBLEM_DEGREE:
            return False, f"Degree {problem.degree} exceeds cap {MAX_PROBLEM_DEGREE}"
        return True, None

    def validate_reference(self, problem: ProblemFile) -> Tuple[bool, Optional[str]]:
        ref = problem.reference
        if ref is None:
            return True, None
        for name in ("p_l", "p_u", "mc"):
            value = getattr(ref, name)
            if value is not None and not 0.0 <= value <= 1.0:
                return False, f"Reference {name} must be a probability"
        if ref.p_l is not None and ref.p_u is not None and ref.p_l > ref.p_u:
            return False, "Reference lower bound exceeds the upper bound"
        return True, None
