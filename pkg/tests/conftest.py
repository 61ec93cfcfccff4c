"""Shared test configuration and fixtures."""
from dataclasses import replace

import pytest
from scipy.constants import c as SPEED_OF_LIGHT
from typer.testing import CliRunner

from iupsim.core import SetupParams
from iupsim.experiments.sweeps import mixed_phase_origin


@pytest.fixture
def params() -> SetupParams:
    """Default parameter set: T = 0.25, L_coh = 0.2 mm, theta1 = 30 deg."""
    return SetupParams()


@pytest.fixture
def separated_params() -> SetupParams:
    """Narrow coherence length (20 um) so the two cross-term envelopes never overlap."""
    return replace(SetupParams(), delta_omega_s=SPEED_OF_LIGHT / 20e-6)


@pytest.fixture
def antiphase_params() -> SetupParams:
    """Default set with the extra V-signal path that puts the cross terms in antiphase."""
    base = SetupParams()
    return replace(base, bbo_extra_path=mixed_phase_origin(base))


@pytest.fixture
def ni_params() -> SetupParams:
    """Balanced gains, theta1 = theta2 = 0, full transmission."""
    return replace(SetupParams(), theta1=0.0, theta2=0.0, transmission=1.0)


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()


@pytest.fixture(autouse=True)
def _isolated_cwd(tmp_path, monkeypatch) -> None:
    """Run every test from its own directory so default result paths never collide."""
    monkeypatch.chdir(tmp_path)
