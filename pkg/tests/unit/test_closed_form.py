"""Unit tests for the analytic detector expectation."""
import math
from dataclasses import replace

import numpy as np
import pytest

from iupsim.closed_form import PhaseConvention, counts_vs_dx, expected_counts, term_breakdown
from iupsim.core import DetectorPort, Mode, derived


def _constructive_dx(params, center):
    """Displacement within one fringe of ``center`` where the H cross term has zero phase."""
    quantities = derived(params)
    offset = quantities.phi(Mode.H_S) - quantities.phi(Mode.IDLER)
    return params.lambda_i * (round(center / params.lambda_i + offset) - offset)


def test_perfect_constructive_ni_fringe(ni_params):
    """theta1 = theta2 = 0, T = 1, equal gains, zero phase at the H envelope peak: N = 4 xi^2."""
    center = derived(ni_params).ni_delay
    point = replace(ni_params, dx=_constructive_dx(ni_params, center))
    xi = ni_params.xi_a
    assert expected_counts(point, envelope_dx=center) == pytest.approx(4 * xi ** 2, rel=1e-9)


def test_only_rotated_intensity_survives_far_outside(params):
    """theta1 = theta2 = 90 deg away from both envelopes leaves N = xi_a^2."""
    quantities = derived(params)
    point = replace(
        params,
        theta1=math.pi / 2,
        theta2=math.pi / 2,
        dx=quantities.ic_delay + 10 * quantities.l_coh,
    )
    assert expected_counts(point) == pytest.approx(params.xi_a ** 2, rel=1e-9)


def test_theta1_zero_removes_self_and_v_cross_terms(params):
    terms = term_breakdown(replace(params, theta1=0.0, dx=derived(params).ic_delay))
    assert terms.self_interference == 0.0
    assert terms.cross_v == 0.0


def test_theta2_zero_removes_sine_terms(params):
    terms = term_breakdown(replace(params, theta2=0.0, dx=derived(params).mixed_delay))
    assert terms.intensity_a_rotated == 0.0
    assert terms.self_interference == 0.0
    assert terms.cross_v == 0.0


def test_single_source(params):
    point = replace(params, xi_a=0.0, dx=derived(params).ni_delay)
    terms = term_breakdown(point)
    assert terms.total == pytest.approx(params.xi_b ** 2 * math.cos(params.theta2) ** 2, rel=1e-15)
    assert terms.cross_h == 0.0 and terms.cross_v == 0.0


def test_breakdown_sums_to_total(params):
    terms = term_breakdown(replace(params, dx=derived(params).mixed_delay + 1e-6))
    parts = terms.incoherent + terms.self_interference + terms.cross_h + terms.cross_v
    assert terms.total == pytest.approx(parts, rel=1e-14)


def test_joint_angle_sign_symmetry(params):
    point = replace(params, dx=derived(params).mixed_delay)
    flipped = replace(point, theta1=-point.theta1, theta2=-point.theta2)
    assert expected_counts(flipped) == pytest.approx(expected_counts(point), rel=1e-12)


def test_half_wavelength_bbo_path_flips_v_cross_term(params):
    point = replace(params, dx=derived(params).ic_delay)
    flipped = replace(point, bbo_extra_path=params.lambda_s / 2)
    assert term_breakdown(flipped).cross_v == pytest.approx(-term_breakdown(point).cross_v, abs=1e-15)
    assert term_breakdown(flipped).cross_h == term_breakdown(point).cross_h


def test_ports_share_the_incoming_photons(params):
    """Summed over both PBS ports the expectation does not depend on theta2."""
    point = replace(params, dx=derived(params).mixed_delay + 0.3e-6)
    totals = [
        expected_counts(replace(point, theta2=math.radians(angle)), DetectorPort.H)
        + expected_counts(replace(point, theta2=math.radians(angle)), DetectorPort.V)
        for angle in (0.0, 20.0, 45.0, 70.0)
    ]
    assert np.ptp(totals) == pytest.approx(0.0, abs=1e-15)


def test_main_text_convention_changes_the_fringe(params):
    center = derived(params).ni_delay
    dx = center + np.linspace(-params.lambda_i, params.lambda_i, 33)
    supplement = counts_vs_dx(params, dx, convention=PhaseConvention.SUPPLEMENT)
    main_text = counts_vs_dx(params, dx, convention=PhaseConvention.MAIN_TEXT)
    assert np.max(np.abs(supplement - main_text)) > 1e-3 * (params.xi_a ** 2 + params.xi_b ** 2)
    assert term_breakdown(replace(params, dx=center), convention=PhaseConvention.MAIN_TEXT).incoherent == (
        term_breakdown(replace(params, dx=center)).incoherent
    )


def test_counts_vs_dx_matches_pointwise(params):
    center = derived(params).mixed_delay
    dx = center + np.linspace(-5e-6, 5e-6, 11)
    vector = counts_vs_dx(params, dx)
    pointwise = [expected_counts(replace(params, dx=float(x))) for x in dx]
    np.testing.assert_allclose(vector, pointwise, rtol=1e-13)
    assert np.all(vector >= 0.0)


def test_frozen_envelope(params):
    """With envelope_dx fixed, only the fringe phase varies across a scan."""
    center = derived(params).ic_delay
    dx = center + np.linspace(-2 * params.lambda_i, 2 * params.lambda_i, 65)
    frozen = counts_vs_dx(params, dx, envelope_dx=center)
    full = counts_vs_dx(params, dx)
    assert frozen[32] == pytest.approx(full[32], rel=1e-12)
    assert frozen[0] != pytest.approx(full[0], rel=1e-9)
    assert frozen[0] == pytest.approx(expected_counts(replace(params, dx=float(dx[0])), envelope_dx=center), rel=1e-12)
