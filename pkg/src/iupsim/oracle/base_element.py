"""Base class and state container for state propagation."""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Union

import numpy as np

# Ordered basis of the truncated single-pair space:
# |H_s V_s H_i b> = |0000>, |1010>, |0110>, |1001>, |0101>
VACUUM, H_IDLER, V_IDLER, H_LOST, V_LOST = range(5)
BASIS_LABELS = ("|0,0,0,0>", "|1,0,1,0>", "|0,1,1,0>", "|1,0,0,1>", "|0,1,0,1>")
PAIR_STATES = (H_IDLER, V_IDLER, H_LOST, V_LOST)


@dataclass(frozen=True)
class Frequencies:
    """Signal and idler angular frequencies at which the state is evaluated.

    Both may be scalars or equally shaped arrays (one entry per spectral node).
    """

    omega_s: Union[float, np.ndarray]
    omega_i: Union[float, np.ndarray]


@dataclass(frozen=True)
class PairState:
    """Complex amplitudes over the five-state basis.

    ``amplitudes`` has shape ``(5,)`` for one frequency or ``(5, n)`` for a
    vector of spectral nodes. The vacuum amplitude is held at 1; pair
    amplitudes are first order in the gains.
    """

    amplitudes: np.ndarray

    @classmethod
    def vacuum(cls, shape=()) -> "PairState":
        amplitudes = np.zeros((5,) + tuple(shape), dtype=complex)
        amplitudes[VACUUM] = 1.0
        return cls(amplitudes)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.amplitudes[index]

    def pair_probability(self) -> np.ndarray:
        """Total probability carried by the four pair states."""
        return np.sum(np.abs(self.amplitudes[list(PAIR_STATES)]) ** 2, axis=0)

    def h_signal_number(self) -> np.ndarray:
        """H-signal photon number, summed over surviving and lost idler branches."""
        return np.abs(self.amplitudes[H_IDLER]) ** 2 + np.abs(self.amplitudes[H_LOST]) ** 2

    def v_signal_number(self) -> np.ndarray:
        return np.abs(self.amplitudes[V_IDLER]) ** 2 + np.abs(self.amplitudes[V_LOST]) ** 2


class OpticalElement(ABC):
    """Abstract element acting on a :class:`PairState`."""

    @abstractmethod
    def apply(self, state: PairState, frequencies: Frequencies) -> PairState:
        """Return the state after this element.

        Args:
            state: Input state
            frequencies: Signal/idler frequencies of the state

        Returns:
            PairState: Output state; the input is never modified

        Raises:
            NotImplementedError: If not implemented by a concrete element
        """
        raise NotImplementedError

    @staticmethod
    def _mix_signal(amplitudes: np.ndarray, theta: float) -> np.ndarray:
        """Waveplate action (H, V) -> (cosθ H + i sinθ V, i sinθ H + cosθ V) on both idler branches."""
        out = amplitudes.copy()
        c, s = np.cos(theta), np.sin(theta)
        for h, v in ((H_IDLER, V_IDLER), (H_LOST, V_LOST)):
            out[h] = c * amplitudes[h] + 1j * s * amplitudes[v]
            out[v] = 1j * s * amplitudes[h] + c * amplitudes[v]
        return out
