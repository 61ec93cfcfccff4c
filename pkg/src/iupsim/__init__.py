"""Simulation of the retro-reflected undetected-photon interferometer with polarization erasure."""

__version__ = "0.1.0"

from iupsim.closed_form import PhaseConvention, TermBreakdown, counts_vs_dx, expected_counts, term_breakdown
from iupsim.core import DerivedQuantities, DetectorPort, Mode, SetupParams, StepperModel, derived, validate
from iupsim.runner import ScenarioRunner

__all__ = [
    "DerivedQuantities",
    "DetectorPort",
    "Mode",
    "PhaseConvention",
    "ScenarioRunner",
    "SetupParams",
    "StepperModel",
    "TermBreakdown",
    "counts_vs_dx",
    "derived",
    "expected_counts",
    "term_breakdown",
    "validate",
]
