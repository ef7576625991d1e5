import pytest

from chebrisk import DEFAULT_SEED, Settings


@pytest.fixture
def no_env_file(tmp_path) -> str:
    return str(tmp_path / "absent.env")


def test_defaults(no_env_file):
    settings = Settings.from_env(no_env_file)
    assert settings.mc_seed == DEFAULT_SEED
    assert settings.moment_method == "auto"
    assert not settings.strict_degree


def test_environment_overrides(monkeypatch, no_env_file):
    monkeypatch.setenv("CHEBRISK_MC_SEED", "7")
    monkeypatch.setenv("CHEBRISK_STRICT_DEGREE", "true")
    monkeypatch.setenv("CHEBRISK_TOL_GAP", "1e-6")
    settings = Settings.from_env(no_env_file)
    assert settings.mc_seed == 7
    assert settings.strict_degree
    assert settings.tol_gap == 1e-6


def test_env_file_is_read(monkeypatch, tmp_path):
    # set then delete so teardown removes what the .env file adds
    monkeypatch.setenv("CHEBRISK_MAX_ITER", "0")
    monkeypatch.delenv("CHEBRISK_MAX_ITER")
    env_file = tmp_path / ".env"
    env_file.write_text("CHEBRISK_MAX_ITER=42\n")
    assert Settings.from_env(str(env_file)).max_iter == 42


def test_unknown_methods_are_rejected(monkeypatch, no_env_file):
    monkeypatch.setenv("CHEBRISK_MOMENT_METHOD", "magic")
    with pytest.raises(ValueError):
        Settings.from_env(no_env_file)
    monkeypatch.setenv("CHEBRISK_MOMENT_METHOD", "quadrature")
    monkeypatch.setenv("CHEBRISK_BOUND_METHOD", "guess")
    with pytest.raises(ValueError):
        Settings.from_env(no_env_file)


def test_solver_and_audit_views():
    settings = Settings(tol_gap=1e-6, max_iter=30, audit_grid_n=2000, audit_tol_recon=1e-9)
    cfg = settings.solver_config()
    assert (cfg.tol_gap, cfg.max_iter) == (1e-6, 30)
    audit = settings.audit_tolerances()
    assert (audit.grid_n, audit.tol_recon) == (2000, 1e-9)
    assert cfg.profile_hash() != Settings().solver_config().profile_hash()


def test_bound_method_defaults_to_range(monkeypatch, no_env_file):
    assert Settings.from_env(no_env_file).bound_method == "range"
    assert "range" in Settings.__doc__
    monkeypatch.setenv("CHEBRISK_BOUND_METHOD", "chebyshev")
    assert Settings.from_env(no_env_file).bound_method == "chebyshev"


def test_refine_steps_reach_the_solver():
    assert Settings(refine_steps=0).solver_config().refine_steps == 0
    assert Settings().solver_config().refine_steps == 2
