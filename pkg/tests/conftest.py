# tests/conftest.py
import pytest
from typer.testing import CliRunner

from noisygt.condense import build_scheme, plan_extractor_style, plan_lossless_style
from noisygt.gtcore import BitMatrix


@pytest.fixture(scope="session")
def noiseless_scheme():
    """D=4, N=256 extractor-style scheme with p = nu = 0."""
    return build_scheme(plan_extractor_style(4, 256, 0, 0), seed=2024)


@pytest.fixture(scope="session")
def noisy_scheme():
    """D=4, N=256 extractor-style scheme with p = 1/10, nu = 1/1000."""
    return build_scheme(plan_extractor_style(4, 256, "0.1", "0.001"), seed=7)


@pytest.fixture(scope="session")
def lossless_scheme():
    return build_scheme(plan_lossless_style(4, 256, 1), seed=11)


@pytest.fixture
def identity4():
    return BitMatrix.identity(4)


@pytest.fixture
def duplicated_columns():
    # columns 0 and 1 are identical
    return BitMatrix.from_dense([[1, 1, 0], [0, 0, 1]])


@pytest.fixture
def runner():
    return CliRunner()
