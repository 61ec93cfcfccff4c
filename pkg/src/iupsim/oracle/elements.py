"""Optical elements of the retro-reflected interferometer, in beam order."""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from iupsim.oracle.base_element import (
    H_IDLER,
    H_LOST,
    PAIR_STATES,
    V_IDLER,
    V_LOST,
    Frequencies,
    OpticalElement,
    PairState,
)

Gain = Union[float, np.ndarray]


@dataclass(frozen=True)
class SpdcA(OpticalElement):
    """First crystal pass: creates an H-signal/idler pair from vacuum."""

    gain: Gain

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        amplitudes = state.amplitudes.copy()
        amplitudes[H_IDLER] = amplitudes[H_IDLER] + self.gain
        return PairState(amplitudes)


@dataclass(frozen=True)
class IdlerDelay(OpticalElement):
    """Idler mirror displacement dx (meters)."""

    dx: float

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        amplitudes = state.amplitudes.copy()
        phase = np.exp(-1j * frequencies.omega_i * self.dx / SPEED_OF_LIGHT)
        for index in PAIR_STATES:
            amplitudes[index] = amplitudes[index] * phase
        return PairState(amplitudes)


@dataclass(frozen=True)
class LossBeamsplitter(OpticalElement):
    """Idler-path object of intensity transmissivity T = cos²β, coupling the idler to mode b."""

    transmission: float

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        t, r = math.sqrt(self.transmission), math.sqrt(1.0 - self.transmission)
        a = state.amplitudes
        amplitudes = a.copy()
        for kept, lost in ((H_IDLER, H_LOST), (V_IDLER, V_LOST)):
            amplitudes[kept] = t * a[kept] - r * a[lost]
            amplitudes[lost] = r * a[kept] + t * a[lost]
        return PairState(amplitudes)


@dataclass(frozen=True)
class DoubledQwp(OpticalElement):
    """Double-passed quarter-wave plate, acting as one half-wave plate at θ₁ on the signal."""

    theta1: float

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        return PairState(self._mix_signal(state.amplitudes, self.theta1))


@dataclass(frozen=True)
class SpdcB(OpticalElement):
    """Second crystal pass.

    First-pass amplitudes pick up the crystal propagation phases of their
    signal polarization (and of the idler, where it survived the loss).
    The second-pass pair is then added to |1,0,1,0> with the pump
    reference phase of this pass.
    """

    gain: Gain
    crystal_length: float
    n_hs: float
    n_vs: float
    n_i: float
    reference_phase: float = 0.0

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        k = self.crystal_length / SPEED_OF_LIGHT
        signal_h = frequencies.omega_s * k * self.n_hs
        signal_v = frequencies.omega_s * k * self.n_vs
        idler = frequencies.omega_i * k * self.n_i

        amplitudes = state.amplitudes.copy()
        amplitudes[H_IDLER] = amplitudes[H_IDLER] * np.exp(-1j * (signal_h + idler))
        amplitudes[V_IDLER] = amplitudes[V_IDLER] * np.exp(-1j * (signal_v + idler))
        amplitudes[H_LOST] = amplitudes[H_LOST] * np.exp(-1j * signal_h)
        amplitudes[V_LOST] = amplitudes[V_LOST] * np.exp(-1j * signal_v)
        amplitudes[H_IDLER] = amplitudes[H_IDLER] + self.gain * np.exp(-1j * self.reference_phase)
        return PairState(amplitudes)


@dataclass(frozen=True)
class BboPath(OpticalElement):
    """Extra path δ_V on the V signal only.

    A tilt of the compensating crystal changes the phase delay; its group
    delay stays at the compensating value, so the phase is taken at the
    phase-matched signal frequency ``omega_ref``.
    """

    path: float
    omega_ref: float

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        amplitudes = state.amplitudes.copy()
        phase = np.exp(-1j * self.omega_ref * self.path / SPEED_OF_LIGHT)
        amplitudes[V_IDLER] = amplitudes[V_IDLER] * phase
        amplitudes[V_LOST] = amplitudes[V_LOST] * phase
        return PairState(amplitudes)


@dataclass(frozen=True)
class OutputHwp(OpticalElement):
    """Output half-wave plate at θ₂ in front of the polarizing beamsplitter."""

    theta2: float

    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        return PairState(self._mix_signal(state.amplitudes, self.theta2))


CANONICAL_ORDER = (SpdcA, IdlerDelay, LossBeamsplitter, DoubledQwp, SpdcB, BboPath, OutputHwp)
