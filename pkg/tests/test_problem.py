import json

import pytest

from chebrisk import ProblemFile, ProblemValidator

SHIPPED = ["illustrative", "example1", "example2", "two_constraint"]


def _doc(problems_dir, name="illustrative") -> dict:
    return json.loads((problems_dir / f"{name}.json").read_text())


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_problems_validate(problems_dir, name):
    assert ProblemValidator().validate_file(problems_dir / f"{name}.json") == (True, None)


def test_problem_shapes(load_problem):
    example2 = load_problem("example2")
    assert example2.nvars == 4
    assert len(example2.constraints[0].poly) == 57
    problem = load_problem("illustrative").to_risk_problem()
    assert problem.degree == 66
    assert problem.variable_names == ["x", "q"]
    assert problem.support_box() == [(-0.5, 0.5), (0.0, 1.0)]
    assert load_problem("illustrative").to_risk_problem(20).degree == 20


def test_json_roundtrip(load_problem):
    original = load_problem("example1")
    again = ProblemFile.from_json(original.to_json())
    assert again.model_dump() == original.model_dump()


def test_reversed_thresholds(problems_dir):
    doc = _doc(problems_dir)
    doc["constraints"][0]["l"], doc["constraints"][0]["u"] = 0.5, 0.0
    ok, message = ProblemValidator().validate_problem(doc)
    assert not ok
    assert "lower threshold 0.5 exceeds" in message


def test_exponent_length(problems_dir):
    doc = _doc(problems_dir)
    doc["constraints"][0]["poly"][0]["exponents"] = [1]
    ok, message = ProblemValidator().validate_problem(doc)
    assert not ok
    assert "does not match the 2 declared variables" in message


def test_duplicate_names(problems_dir):
    doc = _doc(problems_dir)
    doc["variables"][1]["name"] = "x"
    assert ProblemValidator().validate_problem(doc) == (False, "Variable names must be unique")


def test_reference_order(problems_dir):
    doc = _doc(problems_dir)
    doc["reference"] = {"p_l": 0.9, "p_u": 0.5}
    assert ProblemValidator().validate_problem(doc) == (False, "Reference lower bound exceeds the upper bound")


def test_degree_cap(problems_dir):
    doc = _doc(problems_dir)
    doc["degree"] = 500
    ok, message = ProblemValidator().validate_problem(doc)
    assert not ok
    assert "exceeds cap" in message


def test_unknown_distribution(problems_dir):
    doc = _doc(problems_dir)
    doc["variables"][0]["marginal"] = {"dist": "normal", "mu": 0.0}
    ok, message = ProblemValidator().validate_problem(doc)
    assert not ok
    assert message.startswith("Schema error at variables.0.marginal")


def test_unreadable_file(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    ok, message = ProblemValidator().validate_file(bad)
    assert not ok
    assert message.startswith("Cannot read problem file")
    ok, _ = ProblemValidator().validate_file(tmp_path / "missing.json")
    assert not ok
