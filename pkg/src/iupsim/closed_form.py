"""Analytic photon-number expectation at the signal detector.

The expression is the frequency-integrated low-gain result: three
non-interfering intensity terms, one dx-independent self-interference term
between the two polarization components of the first-pass signal, and two
dx-dependent cross terms between first- and second-pass pairs, each under
its own Gaussian coherence envelope.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from iupsim.core import DetectorPort, Mode, SetupParams, derived

ArrayLike = Union[float, np.ndarray]


class PhaseConvention(str, Enum):
    """Sign with which the idler crystal phase enters the cross terms."""

    SUPPLEMENT = "supplement"  # 2π(φ_s − φ_i + dx/λ_i)
    MAIN_TEXT = "main_text"  # 2π(φ_s + φ_i + dx/λ_i)


@dataclass(frozen=True)
class TermBreakdown:
    """Per-term contributions to the detector expectation.

    Fields are floats for a single displacement or arrays for a vector of
    displacements.
    """

    intensity_b: ArrayLike
    intensity_a_parallel: ArrayLike
    intensity_a_rotated: ArrayLike
    self_interference: ArrayLike
    cross_h: ArrayLike
    cross_v: ArrayLike
    total: ArrayLike

    @property
    def incoherent(self) -> ArrayLike:
        """Sum of the three non-interfering intensity terms."""
        return self.intensity_b + self.intensity_a_parallel + self.intensity_a_rotated


def _port_angles(theta2: float, port: DetectorPort):
    # The V port sees the output waveplate rotated by a further 90°.
    if DetectorPort(port) is DetectorPort.V:
        return -np.sin(theta2), np.cos(theta2)
    return np.cos(theta2), np.sin(theta2)


def _breakdown(
    params: SetupParams,
    dx: ArrayLike,
    envelope_dx: Optional[ArrayLike],
    port: DetectorPort,
    convention: PhaseConvention,
) -> TermBreakdown:
    quantities = derived(params)
    l_coh = quantities.l_coh
    dx = np.asarray(dx, dtype=float)
    env_dx = dx if envelope_dx is None else np.asarray(envelope_dx, dtype=float)

    c1, s1 = np.cos(params.theta1), np.sin(params.theta1)
    c2, s2 = _port_angles(params.theta2, port)
    xi_a, xi_b = params.xi_a, params.xi_b
    root_t = np.sqrt(params.transmission)

    phi_hs = quantities.phi(Mode.H_S)
    phi_vs = quantities.phi(Mode.V_S)
    phi_i = quantities.phi(Mode.IDLER)
    if PhaseConvention(convention) is PhaseConvention.MAIN_TEXT:
        phi_i = -phi_i
    fringe = dx / params.lambda_i

    dl_hv = quantities.delta_l(Mode.H_S, Mode.V_S)
    self_envelope = np.exp(-(dl_hv ** 2) / (2.0 * l_coh ** 2))
    envelope_h = np.exp(-((quantities.envelope_center(Mode.H_S) - env_dx) ** 2) / (2.0 * l_coh ** 2))
    envelope_v = np.exp(-((quantities.envelope_center(Mode.V_S) - env_dx) ** 2) / (2.0 * l_coh ** 2))

    intensity_b = xi_b ** 2 * c2 ** 2
    intensity_a_parallel = xi_a ** 2 * c1 ** 2 * c2 ** 2
    intensity_a_rotated = xi_a ** 2 * s1 ** 2 * s2 ** 2
    self_interference = (
        -2.0 * xi_a ** 2 * s1 * c1 * s2 * c2 * self_envelope * np.cos(2.0 * np.pi * (phi_hs - phi_vs))
    )
    cross_h = (
        2.0 * xi_a * xi_b * root_t * c1 * c2 ** 2 * envelope_h
        * np.cos(2.0 * np.pi * ((phi_hs - phi_i) + fringe))
    )
    cross_v = (
        -2.0 * xi_a * xi_b * root_t * s1 * s2 * c2 * envelope_v
        * np.cos(2.0 * np.pi * ((phi_vs - phi_i) + fringe))
    )
    total = intensity_b + intensity_a_parallel + intensity_a_rotated + self_interference + cross_h + cross_v

    if total.ndim == 0:
        return TermBreakdown(
            float(intensity_b), float(intensity_a_parallel), float(intensity_a_rotated),
            float(self_interference), float(cross_h), float(cross_v), float(total),
        )
    shape = total.shape
    return TermBreakdown(
        np.full(shape, intensity_b), np.full(shape, intensity_a_parallel), np.full(shape, intensity_a_rotated),
        np.full(shape, self_interference), cross_h, cross_v, total,
    )


def term_breakdown(
    params: SetupParams,
    port: DetectorPort = DetectorPort.H,
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
    envelope_dx: Optional[float] = None,
) -> TermBreakdown:
    """Evaluate each term of the detector expectation at ``params.dx``.

    Args:
        params: Validated parameter set
        port: PBS output port
        convention: Idler phase sign convention
        envelope_dx: Displacement at which to evaluate the coherence
            envelopes; defaults to ``params.dx``

    Returns:
        TermBreakdown: The six terms and their sum
    """
    return _breakdown(params, params.dx, envelope_dx, port, convention)


def expected_counts(
    params: SetupParams,
    port: DetectorPort = DetectorPort.H,
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
    envelope_dx: Optional[float] = None,
) -> float:
    """Photon-number expectation per mode at the detector.

    Args:
        params: Validated parameter set
        port: PBS output port
        convention: Idler phase sign convention
        envelope_dx: Displacement at which to evaluate the coherence
            envelopes; defaults to ``params.dx``

    Returns:
        float: Non-negative photon-number expectation
    """
    return max(term_breakdown(params, port, convention, envelope_dx).total, 0.0)


def counts_vs_dx(
    params: SetupParams,
    dx: np.ndarray,
    envelope_dx: Optional[ArrayLike] = None,
    port: DetectorPort = DetectorPort.H,
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
) -> np.ndarray:
    """Vectorized expectation over idler displacements; ``params.dx`` is ignored."""
    total = _breakdown(params, np.asarray(dx, dtype=float), envelope_dx, port, convention).total
    return np.maximum(total, 0.0)
