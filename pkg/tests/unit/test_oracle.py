"""Unit tests for the state-propagation oracle."""
import math
from dataclasses import replace

import numpy as np
import pytest

from iupsim.closed_form import expected_counts, term_breakdown
from iupsim.core import DetectorPort, Mode, derived
from iupsim.errors import ConvergenceError, ValidationError
from iupsim.oracle import (
    BboPath,
    DoubledQwp,
    IdlerDelay,
    LossBeamsplitter,
    OutputHwp,
    PairState,
    QuadratureScheme,
    QuadratureSpec,
    SpdcA,
    SpdcB,
    detector_expectation_monochromatic,
    gaussian_cosine_closed,
    gaussian_cosine_identity,
    integrate_over_frequency,
    monochromatic_expansion,
    propagate,
    propagate_state,
    signal_frequencies,
    spectral_gain,
)
from iupsim.oracle.base_element import H_IDLER, H_LOST, V_IDLER, V_LOST


def test_vacuum_has_no_pairs():
    state = PairState.vacuum()
    assert state.pair_probability() == 0.0
    assert state.h_signal_number() == 0.0


def test_pair_probability_sums_the_pair_states():
    state = PairState(np.array([1.0, 0.1 + 0.2j, -0.3j, 0.05, 0.4 - 0.1j]))
    assert state.pair_probability() == pytest.approx(0.05 + 0.09 + 0.0025 + 0.17, rel=1e-12)
    assert state.h_signal_number() == pytest.approx(0.05 + 0.0025, rel=1e-12)
    assert state.v_signal_number() == pytest.approx(0.09 + 0.17, rel=1e-12)


def test_pair_probability_per_spectral_node():
    amplitudes = np.zeros((5, 3), dtype=complex)
    amplitudes[0] = 1.0
    amplitudes[H_IDLER] = [0.1, 0.0, 0.3j]
    amplitudes[V_LOST] = [0.0, 0.2, 0.4]
    np.testing.assert_allclose(PairState(amplitudes).pair_probability(), [0.01, 0.04, 0.25], rtol=1e-12)


def _random_state(seed: int) -> PairState:
    rng = np.random.default_rng(seed)
    amplitudes = rng.normal(size=5) + 1j * rng.normal(size=5)
    amplitudes[0] = 1.0
    return PairState(0.1 * amplitudes)


@pytest.mark.parametrize(
    "element",
    [
        IdlerDelay(0.3e-3),
        LossBeamsplitter(0.3),
        DoubledQwp(0.7),
        SpdcB(0.0, 5e-3, 2.1375, 2.2075, 2.0875, reference_phase=1.3),
        BboPath(300e-9, 1.2e15),
        OutputHwp(1.1),
    ],
    ids=lambda element: type(element).__name__,
)
def test_passive_elements_preserve_the_norm(params, element):
    """Phase shifts, waveplates and the loss beamsplitter only redistribute pair probability."""
    frequencies = signal_frequencies(params, params.omega_s0 * 1.0003)
    state = _random_state(11)
    after = element.apply(state, frequencies)
    assert after.pair_probability() == pytest.approx(state.pair_probability(), rel=1e-12)


@pytest.mark.parametrize("transmission", [0.0, 0.25, 0.5, 0.9, 1.0])
def test_loss_is_unitary_with_one_source(params, transmission):
    """With the second pass off, the generated pair probability does not depend on the loss."""
    point = replace(params, xi_b=0.0, transmission=transmission)
    omega = params.omega_s0 * 0.9998
    state = propagate_state(point, omega)
    assert state.pair_probability() == pytest.approx(spectral_gain(point, point.xi_a, omega) ** 2, rel=1e-12)


def test_no_rotation_no_loss_keeps_pairs_in_h_idler(ni_params):
    state = propagate_state(ni_params, ni_params.omega_s0)
    for index in (V_IDLER, H_LOST, V_LOST):
        assert abs(state[index]) == pytest.approx(0.0, abs=1e-15)
    bound = 2 * spectral_gain(ni_params, ni_params.xi_a, ni_params.omega_s0)
    assert abs(state[H_IDLER]) <= bound * (1 + 1e-12)


def test_full_idler_loss_separates_the_passes(ni_params):
    """With T = 0 the first-pass pair ends up with the lost idler, the second with the kept one."""
    params = replace(ni_params, transmission=0.0)
    omega = params.omega_s0
    state = propagate_state(params, omega)
    assert abs(state[H_LOST]) == pytest.approx(spectral_gain(params, params.xi_a, omega), rel=1e-12)
    assert abs(state[H_IDLER]) == pytest.approx(spectral_gain(params, params.xi_b, omega), rel=1e-12)


def test_single_source_monochromatic(params):
    omega = params.omega_s0 * 1.0001
    point = replace(params, xi_a=0.0)
    expected = spectral_gain(point, point.xi_b, omega) ** 2 * math.cos(point.theta2) ** 2
    assert detector_expectation_monochromatic(point, omega) == pytest.approx(expected, rel=1e-12)


def test_no_interference_without_idler_overlap(ni_params):
    params = replace(ni_params, transmission=0.0)
    omega = params.omega_s0
    expected = spectral_gain(params, params.xi_a, omega) ** 2 + spectral_gain(params, params.xi_b, omega) ** 2
    assert detector_expectation_monochromatic(params, omega) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("port", [DetectorPort.H, DetectorPort.V])
def test_monochromatic_expansion_matches_propagation(params, port):
    """The element-by-element state and the closed expansion agree at fixed frequency."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        point = replace(
            params,
            xi_a=float(rng.uniform(0.01, 0.1)),
            xi_b=float(rng.uniform(0.01, 0.1)),
            theta1=float(rng.uniform(0, math.pi / 2)),
            theta2=float(rng.uniform(0, math.pi / 2)),
            transmission=float(rng.uniform(0, 1)),
            dx=float(rng.uniform(0, 1e-3)),
            bbo_extra_path=float(rng.uniform(0, params.lambda_s)),
        )
        omega = point.omega_s0 + point.delta_omega_s * float(rng.normal())
        scale = spectral_gain(point, point.xi_a, omega) ** 2 + spectral_gain(point, point.xi_b, omega) ** 2
        direct = detector_expectation_monochromatic(point, omega, port)
        assert abs(direct - monochromatic_expansion(point, omega, port)) <= 1e-10 * scale


def test_propagate_rejects_out_of_order_elements(params):
    frequencies = signal_frequencies(params, params.omega_s0)
    with pytest.raises(ValueError, match="canonical order"):
        propagate([OutputHwp(0.1), DoubledQwp(0.2)], frequencies)


def test_partial_chain_in_order(params):
    frequencies = signal_frequencies(params, params.omega_s0)
    state = propagate([SpdcA(0.05), OutputHwp(math.pi / 2)], frequencies)
    assert abs(state[V_IDLER]) == pytest.approx(0.05, rel=1e-12)


def test_signal_frequency_outside_pump_range(params):
    with pytest.raises(ValidationError) as exc_info:
        signal_frequencies(params, params.omega_p * 1.01)
    assert exc_info.value.invariant == "frequency_range"


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(node_count=1)
    with pytest.raises(ValueError):
        QuadratureSpec(node_count=101, scheme=QuadratureScheme.SIMPSON)
    with pytest.raises(ValueError):
        QuadratureSpec(span_sigmas=0.0)
    assert QuadratureSpec(64).doubled().node_count == 128


@pytest.mark.parametrize("y, width", [(0.0, 0.0), (0.3, 1.0), (-2.0, 2.5), (3.0, 5.0)])
def test_gaussian_cosine_identity(y, width):
    delta = 1e13
    a = width / delta
    assert gaussian_cosine_identity(y, a, delta) == pytest.approx(gaussian_cosine_closed(y, a, delta), abs=1e-12)


def test_far_outside_envelopes_gives_incoherent_sum(params):
    """Without theta1 the self term vanishes; far from both envelopes only intensities remain."""
    quantities = derived(params)
    point = replace(params, theta1=0.0, dx=quantities.ic_delay + 10 * quantities.l_coh)
    incoherent = term_breakdown(point).incoherent
    assert integrate_over_frequency(point) == pytest.approx(incoherent, abs=1e-9 * (params.xi_a ** 2 + params.xi_b ** 2))


def test_default_conditions_match_closed_form_at_ic_peak(params):
    point = replace(params, dx=derived(params).ic_delay)
    scale = params.xi_a ** 2 + params.xi_b ** 2
    assert abs(integrate_over_frequency(point) - expected_counts(point)) <= 1e-6 * scale


@pytest.mark.parametrize("port", [DetectorPort.H, DetectorPort.V])
def test_oracle_matches_closed_form_across_regions(params, port):
    quantities = derived(params)
    scale = params.xi_a ** 2 + params.xi_b ** 2
    for dx in (quantities.ni_delay + 1e-6, quantities.mixed_delay, quantities.ic_delay - 0.1e-3):
        point = replace(params, dx=dx)
        assert abs(integrate_over_frequency(point, port=port) - expected_counts(point, port)) <= 1e-6 * scale


@pytest.mark.parametrize("offset", [0.0, 0.25, 0.5])
def test_equal_signal_indices_collapse_to_two_crystal_fringe(params, offset):
    """With n_vs = n_hs and no extra V path both signal polarizations share one fringe and one envelope."""
    point = replace(params, n_vs=params.n_hs, bbo_extra_path=0.0)
    quantities = derived(point)
    point = replace(point, dx=quantities.ni_delay + offset * point.lambda_i + 0.05e-3)

    c2 = math.cos(point.theta2)
    mixed = math.cos(point.theta1 + point.theta2)
    envelope = math.exp(-((quantities.ni_delay - point.dx) ** 2) / (2 * quantities.l_coh ** 2))
    fringe = math.cos(
        2 * math.pi * (quantities.phi(Mode.H_S) - quantities.phi(Mode.IDLER) + point.dx / point.lambda_i)
    )
    two_crystal = (
        point.xi_b ** 2 * c2 ** 2
        + point.xi_a ** 2 * mixed ** 2
        + 2 * point.xi_a * point.xi_b * math.sqrt(point.transmission) * c2 * mixed * envelope * fringe
    )
    scale = point.xi_a ** 2 + point.xi_b ** 2

    terms = term_breakdown(point)
    assert terms.total == pytest.approx(two_crystal, abs=1e-12 * scale)
    assert integrate_over_frequency(point) == pytest.approx(two_crystal, abs=1e-6 * scale)


def test_simpson_agrees_with_gauss_hermite(params):
    point = replace(params, dx=derived(params).mixed_delay)
    gauss = integrate_over_frequency(point, check_convergence=False)
    simpson = integrate_over_frequency(
        point, QuadratureSpec(1024, QuadratureScheme.SIMPSON, 8.0), check_convergence=False
    )
    assert simpson == pytest.approx(gauss, abs=1e-8 * (params.xi_a ** 2 + params.xi_b ** 2))


def test_starved_quadrature_does_not_converge(params):
    point = replace(params, dx=derived(params).ic_delay)
    with pytest.raises(ConvergenceError) as exc_info:
        integrate_over_frequency(point, QuadratureSpec(8))
    assert exc_info.value.change > 1e-9
