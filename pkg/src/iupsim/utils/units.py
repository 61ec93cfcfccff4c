"""Parsing of unit-annotated physical values from run configs."""
import math
import re
from typing import Dict, Union

from scipy.constants import c as SPEED_OF_LIGHT

from iupsim.errors import ConfigError

Number = Union[int, float]

LENGTH_UNITS: Dict[str, float] = {
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "µm": 1e-6,
    "μm": 1e-6,
    "nm": 1e-9,
    "pm": 1e-12,
}
ANGLE_UNITS: Dict[str, float] = {
    "rad": 1.0,
    "deg": math.pi / 180.0,
    "°": math.pi / 180.0,
}
ANGULAR_FREQUENCY_UNITS: Dict[str, float] = {
    "rad/s": 1.0,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*?)?\s*$")


class UnitParser:
    """Convert config values to SI floats."""

    @staticmethod
    def split(value: str, key: str = "value"):
        """Split ``"30 deg"`` into ``(30.0, "deg")``; the unit may be empty."""
        match = _QUANTITY.match(value)
        if not match:
            raise ConfigError(f"{key}: cannot parse quantity {value!r}")
        return float(match.group(1)), (match.group(2) or "").strip()

    @staticmethod
    def _convert(value: Union[Number, str], units: Dict[str, float], kind: str, key: str) -> float:
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected a {kind}, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a {kind}, got {value!r}")
        number, unit = UnitParser.split(value, key)
        if not unit:
            return number
        if unit not in units:
            raise ConfigError(f"{key}: unknown {kind} unit {unit!r} (accepted: {', '.join(units)})")
        return number * units[unit]

    @staticmethod
    def length(value: Union[Number, str], key: str = "length") -> float:
        """Length in meters; bare numbers are taken as meters."""
        return UnitParser._convert(value, LENGTH_UNITS, "length", key)

    @staticmethod
    def angle(value: Union[Number, str], key: str = "angle") -> float:
        """Angle in radians; bare numbers are taken as radians."""
        return UnitParser._convert(value, ANGLE_UNITS, "angle", key)

    @staticmethod
    def angular_frequency(value: Union[Number, str], key: str = "angular frequency") -> float:
        return UnitParser._convert(value, ANGULAR_FREQUENCY_UNITS, "angular frequency", key)

    @staticmethod
    def scalar(value: Union[Number, str], key: str = "value") -> float:
        """Dimensionless number."""
        return UnitParser._convert(value, {}, "number", key)

    @staticmethod
    def bandwidth_from_coherence_length(l_coh: float) -> float:
        """Δω_s = c / L_coh."""
        if not l_coh > 0:
            raise ConfigError(f"coherence_length must be > 0, got {l_coh!r}")
        return SPEED_OF_LIGHT / l_coh
