from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from polynomials import ChebSeries
from sos import (
    AuditTolerances,
    CertificateValidator,
    IntervalSet,
    approximate_indicator,
    validate_certificate,
)


@pytest.fixture(scope="module")
def certificate():
    return approximate_indicator(IntervalSet.single(-0.4, 0.0), 8)


def test_solved_certificate_passes(certificate):
    report = validate_certificate(certificate, grid_n=2000)
    assert report.passed
    assert report.is_valid() == (True, None)
    assert report.grid_violation <= 1e-6
    assert set(report.metrics) >= {"min_box", "min_target", "gram_min_eig", "recon_residual", "objective_residual"}


def test_shifted_certificate_fails(certificate):
    shifted = certificate.coeffs.coeffs.copy()
    shifted[0] -= 0.1
    tampered = replace(certificate, coeffs=ChebSeries(shifted))
    report = validate_certificate(tampered, grid_n=2000)
    ok, message = report.is_valid()
    assert not ok
    failed = {f.split(":")[0] for f in report.failures}
    assert {"box", "target", "reconstruction", "objective"} <= failed
    assert 0.09 <= report.grid_violation <= 0.1 + 1e-6
    assert "reconstruction" in message


def test_indefinite_gram_block_fails(certificate):
    blocks = [b.copy() for b in certificate.gram_blocks]
    blocks[0] = blocks[0] - np.eye(blocks[0].shape[0])
    report = validate_certificate(replace(certificate, gram_blocks=blocks), grid_n=2000)
    assert any(f.startswith("psd") for f in report.failures)


def test_grid_must_be_dense():
    with pytest.raises(ValueError):
        CertificateValidator(grid_n=500)
    with pytest.raises(ValidationError):
        AuditTolerances(grid_n=10)
