"""Brute-force detector expectation by state propagation and spectral quadrature.

The state is propagated element by element at fixed signal frequency, the
H-signal photon number is read off, and the result is averaged over the
Gaussian SPDC spectrum numerically. Nothing here uses the analytic result
in :mod:`iupsim.closed_form`; the two are compared in the tests and in the
selftest.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.integrate import simpson

from iupsim.core import DetectorPort, SetupParams, validate
from iupsim.errors import ConvergenceError, ValidationError
from iupsim.oracle.base_element import Frequencies, OpticalElement, PairState
from iupsim.oracle.elements import (
    CANONICAL_ORDER,
    BboPath,
    DoubledQwp,
    IdlerDelay,
    LossBeamsplitter,
    OutputHwp,
    SpdcA,
    SpdcB,
)
from iupsim.utils.logger import get_logger

Frequency = Union[float, np.ndarray]
CONVERGENCE_RTOL = 1e-9


class QuadratureScheme(str, Enum):
    GAUSS_HERMITE = "gauss-hermite"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class QuadratureSpec:
    """Spectral quadrature rule.

    Attributes:
        node_count: Gauss–Hermite nodes, or Simpson intervals (even)
        scheme: Quadrature scheme
        span_sigmas: Half-width of the uniform grid in units of Δω_s
    """

    node_count: int = 128
    scheme: QuadratureScheme = QuadratureScheme.GAUSS_HERMITE
    span_sigmas: float = 6.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", QuadratureScheme(self.scheme))
        if int(self.node_count) != self.node_count or self.node_count < 2:
            raise ValueError(f"node_count must be an integer >= 2, got {self.node_count!r}")
        if self.scheme is QuadratureScheme.SIMPSON and self.node_count % 2:
            raise ValueError(f"Simpson quadrature needs an even node_count, got {self.node_count}")
        if not self.span_sigmas > 0:
            raise ValueError(f"span_sigmas must be > 0, got {self.span_sigmas!r}")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.node_count, self.scheme, self.span_sigmas)

    def gauss_hermite_rule(self):
        """Nodes and weights for an average over the standard normal density."""
        nodes, weights = np.polynomial.hermite_e.hermegauss(self.node_count)
        return nodes, weights / math.sqrt(2.0 * math.pi)

    def average(self, evaluate: Callable[[np.ndarray], np.ndarray]) -> float:
        """Average ``evaluate(z)`` over the standard normal density of z."""
        if self.scheme is QuadratureScheme.GAUSS_HERMITE:
            nodes, weights = self.gauss_hermite_rule()
            return float(np.sum(weights * evaluate(nodes)))
        nodes = np.linspace(-self.span_sigmas, self.span_sigmas, self.node_count + 1)
        density = np.exp(-0.5 * nodes ** 2)
        return float(simpson(density * evaluate(nodes), x=nodes) / simpson(density, x=nodes))


def spectral_density(params: SetupParams, omega_s: Frequency) -> Frequency:
    """Normalized Gaussian spectrum of the signal, per rad/s."""
    z = (np.asarray(omega_s) - params.omega_s0) / params.delta_omega_s
    return np.exp(-0.5 * z ** 2) / (math.sqrt(2.0 * math.pi) * params.delta_omega_s)


def spectral_gain(params: SetupParams, xi0: float, omega_s: Frequency) -> Frequency:
    """Gain amplitude ξ(ω_s) with ξ(ω_s)² = ξ0²·density(ω_s)."""
    return xi0 * np.sqrt(spectral_density(params, omega_s))


def pump_reference_phase(params: SetupParams) -> float:
    """Phase with which the second-pass pair is generated.

    Referencing pass B to the pump after its round trip fixes the idler
    crystal phase to enter the fringe as −φ_i.
    """
    omega_i0 = params.omega_p - params.omega_s0
    return 2.0 * omega_i0 * params.crystal_length * params.n_i / SPEED_OF_LIGHT


def element_chain(params: SetupParams, gain_a: Frequency, gain_b: Frequency) -> List[OpticalElement]:
    """Elements of the interferometer in canonical beam order."""
    return [
        SpdcA(gain_a),
        IdlerDelay(params.dx),
        LossBeamsplitter(params.transmission),
        DoubledQwp(params.theta1),
        SpdcB(
            gain_b,
            params.crystal_length,
            params.n_hs,
            params.n_vs,
            params.n_i,
            reference_phase=pump_reference_phase(params),
        ),
        BboPath(params.bbo_extra_path, params.omega_s0),
        OutputHwp(params.theta2),
    ]


def propagate(
    elements: Sequence[OpticalElement],
    frequencies: Frequencies,
    state: Optional[PairState] = None,
) -> PairState:
    """Run a state through elements, which must follow the canonical order.

    Args:
        elements: Elements to apply; any in-order subsequence of the chain
        frequencies: Signal/idler frequencies
        state: Input state, vacuum by default

    Returns:
        PairState: Output state

    Raises:
        ValueError: If the elements are out of canonical order
    """
    positions = [CANONICAL_ORDER.index(type(element)) for element in elements]
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        names = [type(element).__name__ for element in elements]
        raise ValueError(f"elements out of canonical order: {names}")
    if state is None:
        state = PairState.vacuum(np.shape(frequencies.omega_s))
    for element in elements:
        state = element.apply(state, frequencies)
    return state


def signal_frequencies(params: SetupParams, omega_s: Frequency) -> Frequencies:
    """Pair the signal frequency with its idler through ω_i = ω_p − ω_s.

    Raises:
        ValidationError: If any idler frequency would be non-positive
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_p = params.omega_p
    if np.any(omega_s <= 0) or np.any(omega_s >= omega_p):
        raise ValidationError(
            "frequency_range", f"signal frequency must lie in (0, omega_p = {omega_p:.6e}) rad/s"
        )
    if omega_s.ndim == 0:
        return Frequencies(float(omega_s), float(omega_p - omega_s))
    return Frequencies(omega_s, omega_p - omega_s)


def propagate_state(params: SetupParams, omega_s: Frequency) -> PairState:
    """State after the output waveplate at signal frequency ``omega_s``."""
    validate(params)
    frequencies = signal_frequencies(params, omega_s)
    chain = element_chain(
        params,
        spectral_gain(params, params.xi_a, frequencies.omega_s),
        spectral_gain(params, params.xi_b, frequencies.omega_s),
    )
    return propagate(chain, frequencies)


def _port_number(state: PairState, port: DetectorPort) -> np.ndarray:
    if DetectorPort(port) is DetectorPort.V:
        return state.v_signal_number()
    return state.h_signal_number()


def detector_expectation_monochromatic(
    params: SetupParams, omega_s: Frequency, port: DetectorPort = DetectorPort.H
) -> Frequency:
    """Signal photon number behind the PBS at one signal frequency."""
    number = _port_number(propagate_state(params, omega_s), port)
    return float(number) if np.ndim(number) == 0 else number


def monochromatic_expansion(
    params: SetupParams, omega_s: Frequency, port: DetectorPort = DetectorPort.H
) -> Frequency:
    """The same photon number as a closed trigonometric expansion at fixed frequency."""
    validate(params)
    frequencies = signal_frequencies(params, omega_s)
    w_s, w_i = frequencies.omega_s, frequencies.omega_i
    xi_a = spectral_gain(params, params.xi_a, w_s)
    xi_b = spectral_gain(params, params.xi_b, w_s)
    t, r = math.sqrt(params.transmission), math.sqrt(1.0 - params.transmission)
    c1, s1 = math.cos(params.theta1), math.sin(params.theta1)
    c2, s2 = math.cos(params.theta2), math.sin(params.theta2)
    length = params.crystal_length
    bbo = params.omega_s0 * params.bbo_extra_path / SPEED_OF_LIGHT
    reference = pump_reference_phase(params)

    phase_h = (w_i * params.dx + w_s * length * params.n_hs + w_i * length * params.n_i) / SPEED_OF_LIGHT - reference
    phase_v = (w_i * params.dx + w_s * length * params.n_vs + w_i * length * params.n_i) / SPEED_OF_LIGHT + bbo - reference
    phase_self = w_s * length * (params.n_hs - params.n_vs) / SPEED_OF_LIGHT - bbo
    branches = t ** 2 + r ** 2

    if DetectorPort(port) is DetectorPort.V:
        value = (
            xi_b ** 2 * s2 ** 2
            + xi_a ** 2 * branches * (c1 ** 2 * s2 ** 2 + s1 ** 2 * c2 ** 2)
            + 2 * xi_a * xi_b * t * c1 * s2 ** 2 * np.cos(phase_h)
            + 2 * xi_a * xi_b * t * s1 * s2 * c2 * np.cos(phase_v)
            + 2 * xi_a ** 2 * branches * s1 * c1 * s2 * c2 * np.cos(phase_self)
        )
    else:
        value = (
            xi_b ** 2 * c2 ** 2
            + xi_a ** 2 * branches * (c1 ** 2 * c2 ** 2 + s1 ** 2 * s2 ** 2)
            + 2 * xi_a * xi_b * t * c1 * c2 ** 2 * np.cos(phase_h)
            - 2 * xi_a * xi_b * t * s1 * s2 * c2 * np.cos(phase_v)
            - 2 * xi_a ** 2 * branches * s1 * c1 * s2 * c2 * np.cos(phase_self)
        )
    return float(value) if np.ndim(value) == 0 else value


def _spectral_average(params: SetupParams, quad: QuadratureSpec, port: DetectorPort) -> float:
    def evaluate(z: np.ndarray) -> np.ndarray:
        frequencies = signal_frequencies(params, params.omega_s0 + params.delta_omega_s * z)
        # Unit-density gains: the quadrature weights carry the spectrum.
        chain = element_chain(params, params.xi_a, params.xi_b)
        return _port_number(propagate(chain, frequencies), port)

    return quad.average(evaluate)


def integrate_over_frequency(
    params: SetupParams,
    quad: Optional[QuadratureSpec] = None,
    port: DetectorPort = DetectorPort.H,
    check_convergence: bool = True,
) -> float:
    """Detector expectation integrated over the SPDC spectrum.

    Args:
        params: Validated parameter set
        quad: Quadrature rule; 128-node Gauss–Hermite by default
        port: PBS output port
        check_convergence: Also evaluate with twice the nodes and compare

    Returns:
        float: Photon-number expectation per mode

    Raises:
        ConvergenceError: If doubling the nodes changes the result by more
            than 1e-9 of the total generated photon number
    """
    validate(params)
    quad = quad or QuadratureSpec()
    value = _spectral_average(params, quad, port)
    if check_convergence:
        scale = params.xi_a ** 2 + params.xi_b ** 2
        refined = _spectral_average(params, quad.doubled(), port)
        change = abs(refined - value) / scale if scale > 0 else 0.0
        get_logger().debug(
            "quadrature %s n=%d -> %.17g, n=%d -> %.17g (relative change %.3e)",
            quad.scheme.value, quad.node_count, value, 2 * quad.node_count, refined, change,
        )
        if change > CONVERGENCE_RTOL:
            raise ConvergenceError(
                f"{quad.scheme.value} quadrature with {quad.node_count} nodes not converged: "
                f"doubling changes the result by {change:.3e} (tolerance {CONVERGENCE_RTOL:g})",
                change=change,
            )
    return max(value, 0.0)


def gaussian_cosine_identity(y: float, a: float, delta: float, quad: Optional[QuadratureSpec] = None) -> float:
    """Quadrature of ∫ Normal(x; 0, Δ)·cos(y + x·a) dx."""
    quad = quad or QuadratureSpec()
    return quad.average(lambda z: np.cos(y + a * delta * z))


def gaussian_cosine_closed(y: float, a: float, delta: float) -> float:
    """Closed form exp(−a²Δ²/2)·cos(y) of the same integral."""
    return math.exp(-0.5 * (a * delta) ** 2) * math.cos(y)
