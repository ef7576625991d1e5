import csv

import pytest

from chebrisk.cli import (
    COMMANDS,
    EXIT_INSTABILITY,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_SOLVER,
    build_parser,
    exit_code_for,
    main,
    residual_lines,
    solver_failure,
)
from chebrisk.errors import ProblemFileError, StageError
from moments import MomentInstability
from sos import MissingCertificate, SolverFailure


@pytest.fixture
def base_args(tmp_path):
    return ["--cache", str(tmp_path / "certificates"), "--env-file", str(tmp_path / "absent.env"), "--log-level", "WARNING"]


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_parser_defaults():
    args = build_parser().parse_args(["eval", "--problem", "p.json"])
    assert args.degree is None
    assert not args.solve_missing
    args = build_parser().parse_args(["approximate", "--target=-0.4,0", "--target", "0.5,1"])
    assert args.target == [(-0.4, 0.0), (0.5, 1.0)]
    assert args.degree == 20


def test_exit_codes():
    assert exit_code_for(MomentInstability(20, 11)) == EXIT_INSTABILITY
    assert exit_code_for(StageError("moments", MomentInstability(20, 11))) == EXIT_INSTABILITY
    assert exit_code_for(SolverFailure("stalled", "max_iter")) == EXIT_SOLVER
    assert exit_code_for(MissingCertificate("ab" * 32)) == EXIT_INVALID
    assert exit_code_for(ProblemFileError("bad")) == EXIT_INVALID
    assert exit_code_for(RuntimeError("boom")) == 1


@pytest.mark.asyncio
async def test_validate(base_args, problems_dir, tmp_path, capsys):
    good = [str(problems_dir / f"{name}.json") for name in ("illustrative", "two_constraint")]
    assert await main(base_args + ["validate", *good]) == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": [], "constraints": []}')
    assert await main(base_args + ["validate", *good, str(bad)]) == EXIT_INVALID
    out = capsys.readouterr().out
    assert "✗" in out and "at least one variable" in out


@pytest.mark.asyncio
async def test_invalid_problem_is_rejected(base_args, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": [], "constraints": []}')
    assert await main(base_args + ["eval", "--problem", str(bad)]) == EXIT_INVALID


@pytest.mark.asyncio
async def test_invalid_settings(base_args, monkeypatch):
    monkeypatch.setenv("CHEBRISK_MOMENT_METHOD", "magic")
    assert await main(base_args + ["audit"]) == EXIT_INVALID


@pytest.mark.asyncio
async def test_mc_writes_csv(base_args, problems_dir, tmp_path, capsys):
    out = tmp_path / "mc.csv"
    problem = str(problems_dir / "two_constraint.json")
    argv = base_args + ["mc", "--problem", problem, "--samples", "5000", "--seed", "1", "--csv", str(out)]
    assert await main(argv) == EXIT_OK
    assert await main(argv) == EXIT_OK
    rows = _read_csv(out)
    assert len(rows) == 2
    assert list(rows[0]) == ["problem", "n", "seed", "estimate", "ci"]
    assert rows[0]["problem"] == "two_constraint"
    assert float(rows[0]["estimate"]) == 1.0
    assert rows[0] == rows[1]
    assert "5000 samples, seed 1" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_eval_needs_certificates(base_args, problems_dir):
    argv = base_args + ["eval", "--problem", str(problems_dir / "illustrative.json"), "--degree", "8"]
    assert await main(argv) == EXIT_INVALID


@pytest.mark.asyncio
async def test_eval_solves_then_reuses(base_args, problems_dir, tmp_path, capsys):
    out = tmp_path / "bounds.csv"
    argv = base_args + ["eval", "--problem", str(problems_dir / "illustrative.json"), "--degree", "8", "--csv", str(out)]
    assert await main(argv + ["--solve-missing"]) == EXIT_OK
    assert await main(argv) == EXIT_OK
    rows = _read_csv(out)
    assert len(rows) == 2
    assert list(rows[0]) == [
        "problem", "p_l", "p_u", "d_requested", "d_used", "validity_degree", "upper_only", "offline_s", "online_s", "clamped",
    ]
    assert rows[0]["d_used"] == "8"
    assert rows[0]["p_u"] == rows[1]["p_u"]
    assert 0.0 <= float(rows[0]["p_l"]) <= float(rows[0]["p_u"]) <= 1.0
    assert "<= P(unsafe) <=" in capsys.readouterr().out


@pytest.mark.asyncio
async def test_approximate_then_audit(base_args, capsys):
    assert await main(base_args + ["approximate", "--target=-0.4,0", "--degree", "6"]) == EXIT_OK
    assert await main(base_args + ["approximate", "--target=-0.4,0", "--complement", "--degree", "6"]) == EXIT_OK
    assert await main(base_args + ["audit"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "✓ Certificate for [-0.4, 0]" in out
    assert "2/2 certificates passed" in out


def test_table1_is_an_alias_of_sweep():
    args = build_parser().parse_args(["table1", "--degrees", "20", "30"])
    assert args.command == "table1"
    assert args.degrees == [20, 30]
    assert COMMANDS["table1"] is COMMANDS["sweep"]


@pytest.mark.asyncio
async def test_approximate_reports_residuals_and_time(base_args, capsys):
    assert await main(base_args + ["approximate", "--target=-0.4,0", "--degree", "6"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "wall time" in out
    assert "primal_inf" in out
    assert "recon_residual" in out


@pytest.mark.asyncio
async def test_audit_failure_reports_failing_residual(base_args, monkeypatch, capsys):
    monkeypatch.setenv("CHEBRISK_AUDIT_TOL_RECON", "1e-300")
    assert await main(base_args + ["approximate", "--target=-0.4,0", "--degree", "6"]) == EXIT_SOLVER
    err = capsys.readouterr().err
    assert "failed its audit" in err
    assert "recon_residual" in err
    assert "solver status" in err


def test_solver_failure_is_unwrapped_from_stages():
    cause = SolverFailure("stalled", "numerical", {"primal_inf": 2e-7})
    assert solver_failure(StageError("certificates", cause)) is cause
    assert solver_failure(RuntimeError("boom")) is None
    assert residual_lines(cause.residuals) == ["primal_inf     2.000e-07"]
