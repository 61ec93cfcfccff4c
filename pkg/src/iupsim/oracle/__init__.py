"""Brute-force state-propagation evaluator of the detector expectation."""
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
from iupsim.oracle.propagation import (
    QuadratureScheme,
    QuadratureSpec,
    detector_expectation_monochromatic,
    element_chain,
    gaussian_cosine_closed,
    gaussian_cosine_identity,
    integrate_over_frequency,
    monochromatic_expansion,
    propagate,
    propagate_state,
    signal_frequencies,
    spectral_gain,
)

__all__ = [
    "CANONICAL_ORDER",
    "BboPath",
    "DoubledQwp",
    "Frequencies",
    "IdlerDelay",
    "LossBeamsplitter",
    "OpticalElement",
    "OutputHwp",
    "PairState",
    "QuadratureScheme",
    "QuadratureSpec",
    "SpdcA",
    "SpdcB",
    "detector_expectation_monochromatic",
    "element_chain",
    "gaussian_cosine_closed",
    "gaussian_cosine_identity",
    "integrate_over_frequency",
    "monochromatic_expansion",
    "propagate",
    "propagate_state",
    "signal_frequencies",
    "spectral_gain",
]
