"""Physical parameters, unit conventions and derived quantities of the interferometer.

All values are SI: lengths and wavelengths in meters, angles in radians,
angular frequencies in rad/s. Unit-annotated input is normalized at the
config boundary (see :mod:`iupsim.config`).
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from iupsim.errors import ValidationError

MAX_LOW_GAIN = 0.2
ENERGY_CONSERVATION_RTOL = 1e-9
DEFAULT_DEVIATION_BOUND = 3.6e-6


class Mode(str, Enum):
    """Crystal propagation modes with their own refractive index."""

    H_S = "H_s"
    V_S = "V_s"
    IDLER = "i"


class DetectorPort(str, Enum):
    """Output port of the final polarizing beamsplitter."""

    H = "H"
    V = "V"


def angular_frequency(wavelength: float) -> float:
    """Vacuum angular frequency 2πc/λ."""
    return 2.0 * math.pi * SPEED_OF_LIGHT / wavelength


def idler_wavelength(lambda_p: float, lambda_s: float) -> float:
    """Idler wavelength fixed by energy conservation.

    Args:
        lambda_p: Pump wavelength in meters
        lambda_s: Signal wavelength in meters

    Returns:
        float: λ_i satisfying 1/λ_p = 1/λ_s + 1/λ_i

    Raises:
        ValidationError: If the signal is not longer than the pump
    """
    if lambda_s <= lambda_p:
        raise ValidationError(
            "energy_conservation",
            f"signal wavelength {lambda_s!r} must exceed pump wavelength {lambda_p!r}",
        )
    return lambda_p * lambda_s / (lambda_s - lambda_p)


@dataclass(frozen=True)
class SetupParams:
    """Complete parameter set of the retro-reflected interferometer."""

    xi_a: float = 0.05
    xi_b: float = 0.05
    theta1: float = math.radians(30.0)
    theta2: float = math.radians(45.0)
    transmission: float = 0.25
    dx: float = 0.0
    crystal_length: float = 5e-3
    lambda_p: float = 1064e-9
    lambda_s: float = 1550e-9
    lambda_i: float = field(default_factory=lambda: idler_wavelength(1064e-9, 1550e-9))
    n_hs: float = 2.1375
    n_vs: float = 2.2075
    n_i: float = 2.0875
    delta_omega_s: float = SPEED_OF_LIGHT / 0.2e-3
    bbo_extra_path: float = 0.0
    # Metadata only; phase matching is not modelled.
    poling_period: float = 30.5e-6

    @property
    def beta(self) -> float:
        """Loss-beamsplitter angle with T = cos²β."""
        return math.acos(math.sqrt(self.transmission))

    @property
    def omega_p(self) -> float:
        return angular_frequency(self.lambda_p)

    @property
    def omega_s0(self) -> float:
        return angular_frequency(self.lambda_s)

    def index(self, mode: Mode) -> float:
        """Refractive index of a propagation mode."""
        return {Mode.H_S: self.n_hs, Mode.V_S: self.n_vs, Mode.IDLER: self.n_i}[Mode(mode)]

    def wavelength(self, mode: Mode) -> float:
        """Vacuum wavelength carried by a propagation mode."""
        return self.lambda_i if Mode(mode) is Mode.IDLER else self.lambda_s


@dataclass(frozen=True)
class DerivedQuantities:
    """Quantities derived from a validated :class:`SetupParams`."""

    l_coh: float
    crystal_length: float
    indices: Dict[Mode, float]
    wavelengths: Dict[Mode, float]
    bbo_extra_path: float

    def delta_l(self, x: Mode, w: Mode) -> float:
        """Optical path difference ΔL = L·(n_x − n_w) in meters."""
        return self.crystal_length * (self.indices[Mode(x)] - self.indices[Mode(w)])

    def phi(self, mode: Mode) -> float:
        """Accumulated cycle count L·n/λ; the V signal also carries δ_V/λ_s."""
        mode = Mode(mode)
        cycles = self.crystal_length * self.indices[mode] / self.wavelengths[mode]
        if mode is Mode.V_S:
            cycles += self.bbo_extra_path / self.wavelengths[mode]
        return cycles

    def envelope_center(self, mode: Mode) -> float:
        """Idler displacement at which the cross term of a signal mode peaks."""
        return self.delta_l(mode, Mode.IDLER)

    @property
    def ni_delay(self) -> float:
        """Envelope centre of the H-signal cross term (nonlinear-interferometer mode)."""
        return self.envelope_center(Mode.H_S)

    @property
    def ic_delay(self) -> float:
        """Envelope centre of the V-signal cross term (induced-coherence mode)."""
        return self.envelope_center(Mode.V_S)

    @property
    def mixed_delay(self) -> float:
        return 0.5 * (self.ni_delay + self.ic_delay)


@dataclass(frozen=True)
class StepperModel:
    """Macro translation stage with a smooth, bounded deviation from linear motion.

    Actual position of step k is ``k * nominal_step + deviation(k)`` with
    ``deviation(k) = deviation_amplitude * sin(2πk / deviation_period)``.
    """

    nominal_step: float
    deviation_amplitude: float = 0.0
    deviation_period: float = 40.0
    deviation_bound: float = DEFAULT_DEVIATION_BOUND

    def __post_init__(self):
        if not self.nominal_step > 0:
            raise ValidationError("stepper_step", f"nominal_step must be > 0, got {self.nominal_step!r}")
        if not self.deviation_period > 0:
            raise ValidationError("stepper_period", f"deviation_period must be > 0, got {self.deviation_period!r}")
        if abs(self.deviation_amplitude) > self.deviation_bound:
            raise ValidationError(
                "stepper_repeatability",
                f"|deviation_amplitude| {abs(self.deviation_amplitude)!r} exceeds bound {self.deviation_bound!r}",
            )

    def deviation(self, index: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        return self.deviation_amplitude * np.sin(2.0 * np.pi * np.asarray(index, dtype=float) / self.deviation_period)

    def position(self, index: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """Actual stage position of one or more step indices."""
        return np.asarray(index, dtype=float) * self.nominal_step + self.deviation(index)


def validate(params: SetupParams) -> SetupParams:
    """Check every invariant of a parameter set.

    Args:
        params: Parameter set to check

    Returns:
        SetupParams: The same object, unchanged

    Raises:
        ValidationError: Naming the first violated invariant
    """
    for name in params.__dataclass_fields__:
        value = getattr(params, name)
        if not math.isfinite(value):
            raise ValidationError("finite", f"{name} must be finite, got {value!r}")

    for name in ("crystal_length", "lambda_p", "lambda_s", "lambda_i", "poling_period"):
        if getattr(params, name) <= 0:
            raise ValidationError("positive_length", f"{name} must be > 0, got {getattr(params, name)!r}")
    for name in ("n_hs", "n_vs", "n_i", "delta_omega_s"):
        if getattr(params, name) <= 0:
            raise ValidationError("positive_constant", f"{name} must be > 0, got {getattr(params, name)!r}")

    if not 0.0 <= params.transmission <= 1.0:
        raise ValidationError("transmission_range", f"transmission must lie in [0, 1], got {params.transmission!r}")

    for name in ("xi_a", "xi_b"):
        value = getattr(params, name)
        if value < 0:
            raise ValidationError("low_gain", f"{name} must be >= 0, got {value!r}")
        if value > MAX_LOW_GAIN:
            raise ValidationError(
                "low_gain", f"{name} = {value!r} exceeds the low-gain bound {MAX_LOW_GAIN}"
            )

    inverse_p = 1.0 / params.lambda_p
    mismatch = abs(inverse_p - 1.0 / params.lambda_s - 1.0 / params.lambda_i) / inverse_p
    if mismatch > ENERGY_CONSERVATION_RTOL:
        raise ValidationError(
            "energy_conservation",
            f"1/lambda_p - 1/lambda_s - 1/lambda_i has relative mismatch {mismatch:.3e} "
            f"(tolerance {ENERGY_CONSERVATION_RTOL:g}); expected lambda_i = "
            f"{idler_wavelength(params.lambda_p, params.lambda_s)!r}",
        )
    return params


def derived(params: SetupParams) -> DerivedQuantities:
    """Compute coherence length, path differences and phases of a parameter set."""
    validate(params)
    return DerivedQuantities(
        l_coh=SPEED_OF_LIGHT / params.delta_omega_s,
        crystal_length=params.crystal_length,
        indices={mode: params.index(mode) for mode in Mode},
        wavelengths={mode: params.wavelength(mode) for mode in Mode},
        bbo_extra_path=params.bbo_extra_path,
    )
