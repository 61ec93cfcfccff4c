"""Unit tests for parameters, invariants and derived quantities."""
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import c as SPEED_OF_LIGHT

from iupsim.core import (
    DEFAULT_DEVIATION_BOUND,
    Mode,
    StepperModel,
    derived,
    idler_wavelength,
    validate,
)
from iupsim.errors import ValidationError


def test_idler_wavelength_from_energy_conservation():
    """The idler sits near 3.39 um for a 1064 nm pump and 1550 nm signal."""
    lambda_i = idler_wavelength(1064e-9, 1550e-9)
    assert 1 / 1064e-9 == pytest.approx(1 / 1550e-9 + 1 / lambda_i, rel=1e-12)
    assert lambda_i == pytest.approx(3.3918e-6, rel=1e-3)


def test_idler_wavelength_rejects_signal_below_pump():
    with pytest.raises(ValidationError) as exc_info:
        idler_wavelength(1064e-9, 800e-9)
    assert exc_info.value.invariant == "energy_conservation"


def test_default_params_are_valid(params):
    assert validate(params) is params


@pytest.mark.parametrize(
    "changes, invariant",
    [
        ({"lambda_i": 3.4e-6}, "energy_conservation"),
        ({"xi_a": 0.5}, "low_gain"),
        ({"xi_b": -0.01}, "low_gain"),
        ({"transmission": 1.5}, "transmission_range"),
        ({"crystal_length": 0.0}, "positive_length"),
        ({"n_i": -2.0}, "positive_constant"),
        ({"theta1": float("nan")}, "finite"),
    ],
)
def test_validate_names_violated_invariant(params, changes, invariant):
    """Each invalid set is rejected with the name of the broken invariant."""
    with pytest.raises(ValidationError) as exc_info:
        validate(replace(params, **changes))
    assert exc_info.value.invariant == invariant
    assert str(exc_info.value).startswith(invariant)


def test_coherence_length_from_bandwidth(params):
    quantities = derived(replace(params, delta_omega_s=SPEED_OF_LIGHT / 0.2e-3))
    assert quantities.l_coh == pytest.approx(0.2e-3, rel=1e-12)


def test_equal_signal_indices_give_zero_path_difference(params):
    quantities = derived(replace(params, n_vs=params.n_hs))
    assert quantities.delta_l(Mode.H_S, Mode.V_S) == 0.0


def test_signal_path_difference(params):
    """L = 5 mm and n_vs - n_hs = 0.07 separate the envelopes by 0.35 mm."""
    quantities = derived(params)
    assert quantities.delta_l(Mode.V_S, Mode.H_S) == pytest.approx(0.35e-3, rel=1e-9)
    assert quantities.ni_delay == pytest.approx(0.25e-3, rel=1e-9)
    assert quantities.ic_delay == pytest.approx(0.6e-3, rel=1e-9)
    assert quantities.mixed_delay == pytest.approx(0.425e-3, rel=1e-9)


def test_bbo_path_shifts_only_v_signal_phase(params):
    base = derived(params)
    shifted = derived(replace(params, bbo_extra_path=params.lambda_s / 4))
    assert shifted.phi(Mode.V_S) - base.phi(Mode.V_S) == pytest.approx(0.25, abs=1e-9)
    assert shifted.phi(Mode.H_S) == base.phi(Mode.H_S)
    assert shifted.phi(Mode.IDLER) == base.phi(Mode.IDLER)


@pytest.mark.parametrize("x", list(Mode))
@pytest.mark.parametrize("w", list(Mode))
def test_path_difference_is_antisymmetric(params, x, w):
    quantities = derived(params)
    assert quantities.delta_l(x, w) == -quantities.delta_l(w, x)
    assert quantities.delta_l(x, x) == 0.0


@pytest.mark.parametrize("factor", [0.5, 2.0, 3.0])
def test_crystal_length_scales_paths_and_phases(params, factor):
    """Without an extra V path every ΔL and every accumulated phase is linear in L."""
    base = derived(params)
    scaled = derived(replace(params, crystal_length=factor * params.crystal_length))
    for x in Mode:
        assert scaled.phi(x) == pytest.approx(factor * base.phi(x), rel=1e-12)
        for w in Mode:
            assert scaled.delta_l(x, w) == pytest.approx(factor * base.delta_l(x, w), rel=1e-12, abs=1e-18)


def test_derived_is_pure(params):
    assert derived(params) == derived(params)


def test_beamsplitter_angle_matches_transmission(params):
    assert math.cos(params.beta) ** 2 == pytest.approx(params.transmission, rel=1e-12)


def test_stepper_positions():
    stepper = StepperModel(5e-6, deviation_amplitude=2e-6, deviation_period=40.0)
    assert stepper.position(0) == 0.0
    assert stepper.position(10) == pytest.approx(10 * 5e-6 + 2e-6, rel=1e-12)
    positions = stepper.position(np.arange(80))
    assert positions.shape == (80,)
    assert np.max(np.abs(positions - np.arange(80) * 5e-6)) <= 2e-6 + 1e-18


def test_linear_stepper_has_no_deviation():
    stepper = StepperModel(3.5e-6)
    assert np.all(stepper.deviation(np.arange(100)) == 0.0)


@pytest.mark.parametrize(
    "kwargs, invariant",
    [
        ({"nominal_step": 0.0}, "stepper_step"),
        ({"nominal_step": 5e-6, "deviation_period": 0.0}, "stepper_period"),
        ({"nominal_step": 5e-6, "deviation_amplitude": 2 * DEFAULT_DEVIATION_BOUND}, "stepper_repeatability"),
    ],
)
def test_stepper_validation(kwargs, invariant):
    with pytest.raises(ValidationError) as exc_info:
        StepperModel(**kwargs)
    assert exc_info.value.invariant == invariant
