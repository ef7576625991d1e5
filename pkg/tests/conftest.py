"""Shared fixtures: the shipped problems, marginals and a throwaway certificate cache."""

import math
from pathlib import Path

import pytest

from chebrisk import ProblemFile, RiskEstimator, Settings
from moments import BetaMarginal, UniformMarginal
from polynomials import MultiPoly

PROBLEMS_DIR = Path(__file__).resolve().parent.parent / "problems"


@pytest.fixture
def problems_dir() -> Path:
    return PROBLEMS_DIR


@pytest.fixture
def load_problem():
    def _load(name: str) -> ProblemFile:
        return ProblemFile.load(PROBLEMS_DIR / f"{name}.json")

    return _load


@pytest.fixture
def ball_margins():
    """x ~ U[-0.5, 0.5] and q ~ Beta(3 - sqrt 2, 3 + sqrt 2) of the ball-and-hole problem."""
    return [
        UniformMarginal(a=-0.5, b=0.5),
        BetaMarginal(alpha=3 - math.sqrt(2), beta=3 + math.sqrt(2)),
    ]


@pytest.fixture
def ball_poly() -> MultiPoly:
    """z = 0.5 x - 0.5 q."""
    return MultiPoly.from_terms(2, [((1, 0), 0.5), ((0, 1), -0.5)])


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(cache_dir=str(tmp_path / "certificates"), audit_grid_n=2000)


@pytest.fixture
def estimator(settings) -> RiskEstimator:
    return RiskEstimator(settings)
