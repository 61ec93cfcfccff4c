"""Base class for simulation scenarios."""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, ClassVar, Dict, List, Mapping, Optional, Sequence, Tuple

from iupsim.analysis import FringeMetrics, ScanResult
from iupsim.closed_form import expected_counts
from iupsim.core import SetupParams, StepperModel, validate
from iupsim.errors import ConfigError
from iupsim.experiments.sweeps import SweepGrid, standard_delays
from iupsim.oracle.propagation import QuadratureSpec, integrate_over_frequency

Table = Tuple[Sequence[str], List[Sequence[Any]]]

# Option kinds understood by the config loader
LENGTH = "length"
ANGLE = "angle"
INTEGER = "int"
NUMBER = "float"
BOOLEAN = "bool"
ANGLE_GRID = "angle_grid"
OPTIONAL_LENGTH = "optional_length"
NAMED_LENGTHS = "named_lengths"


@dataclass(frozen=True)
class OptionSpec:
    """Declared scenario option: its kind and SI default (None meaning derived at run time)."""

    kind: str
    default: Any
    help: str = ""


@dataclass
class ScenarioReport:
    """Everything a scenario produced, keyed by output file stem."""

    scenario: str
    params: SetupParams
    grids: Dict[str, SweepGrid] = field(default_factory=dict)
    scans: Dict[str, ScanResult] = field(default_factory=dict)
    metrics: Dict[str, FringeMetrics] = field(default_factory=dict)
    tables: Dict[str, Table] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)


class BaseScenario(ABC):
    """Abstract base class for scenarios.

    Subclasses declare a stable ``name``, their ``options`` schema and
    implement :meth:`run`.
    """

    name: ClassVar[str] = ""
    description: ClassVar[str] = ""
    options: ClassVar[Dict[str, OptionSpec]] = {}

    def __init__(
        self,
        params: SetupParams,
        options: Optional[Mapping[str, Any]] = None,
        quadrature: Optional[QuadratureSpec] = None,
        stepper: Optional[StepperModel] = None,
        threads: int = 1,
    ) -> None:
        """Initialize a scenario.

        Args:
            params: Parameter set, validated here
            options: Resolved scenario options in SI units; missing keys take
                their declared defaults
            quadrature: Spectral quadrature for the oracle cross-check
            stepper: Macro stage model, for scenarios that move the stage
            threads: Worker threads for grid evaluation

        Raises:
            ConfigError: On an option the scenario does not declare
        """
        self.params = validate(params)
        self.values = self.resolve_options(options or {})
        self.quadrature = quadrature or QuadratureSpec()
        self.stepper = stepper
        self.threads = threads

    @classmethod
    def default_options(cls) -> Dict[str, Any]:
        return {key: spec.default for key, spec in cls.options.items()}

    @classmethod
    def resolve_options(cls, options: Mapping[str, Any]) -> Dict[str, Any]:
        unknown = sorted(set(options) - set(cls.options))
        if unknown:
            raise ConfigError(f"scenario_options: unknown key(s) for {cls.name}: {', '.join(unknown)}")
        values = cls.default_options()
        values.update(options)
        return values

    def option(self, key: str) -> Any:
        return self.values[key]

    def oracle_check(self) -> Dict[str, float]:
        """Compare closed form and oracle at the three standard delays.

        Returns:
            Dict[str, float]: Largest absolute deviation relative to ξ_A² + ξ_B²,
            and the oracle value at each delay
        """
        scale = self.params.xi_a ** 2 + self.params.xi_b ** 2
        summary: Dict[str, float] = {}
        worst = 0.0
        for label, delay in standard_delays(self.params).items():
            point = replace(self.params, dx=delay)
            oracle = integrate_over_frequency(point, self.quadrature)
            closed = expected_counts(point)
            summary[f"oracle_counts_{label}"] = oracle
            if scale > 0:
                worst = max(worst, abs(oracle - closed) / scale)
        summary["oracle_max_deviation"] = worst
        return summary

    @abstractmethod
    def run(self) -> ScenarioReport:
        """Run the scenario.

        Returns:
            ScenarioReport: Grids, scans, metrics and summary statistics

        Raises:
            NotImplementedError: If not implemented by a concrete scenario
        """
        raise NotImplementedError
