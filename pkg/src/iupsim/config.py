"""Run configuration: YAML loading, unit normalization and the reproducibility manifest."""
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from iupsim.core import DEFAULT_DEVIATION_BOUND, SetupParams, StepperModel, idler_wavelength, validate
from iupsim.errors import ConfigError
from iupsim.experiments.base_scenario import (
    ANGLE,
    ANGLE_GRID,
    BOOLEAN,
    INTEGER,
    LENGTH,
    NAMED_LENGTHS,
    NUMBER,
    OPTIONAL_LENGTH,
)
from iupsim.experiments.scenarios import SCENARIOS
from iupsim.oracle.propagation import QuadratureScheme, QuadratureSpec
from iupsim.utils.report_writer import OutputFormat
from iupsim.utils.units import UnitParser

MIN_QUADRATURE_NODES = 16
AUTO = "auto"
ANGULAR_FREQUENCY = "angular_frequency"

SETUP_KINDS: Dict[str, str] = {
    "xi_a": NUMBER,
    "xi_b": NUMBER,
    "theta1": ANGLE,
    "theta2": ANGLE,
    "transmission": NUMBER,
    "dx": LENGTH,
    "crystal_length": LENGTH,
    "lambda_p": LENGTH,
    "lambda_s": LENGTH,
    "lambda_i": LENGTH,
    "n_hs": NUMBER,
    "n_vs": NUMBER,
    "n_i": NUMBER,
    "delta_omega_s": ANGULAR_FREQUENCY,
    "coherence_length": LENGTH,
    "bbo_extra_path": LENGTH,
    "poling_period": LENGTH,
}
VERSION_KEY = "iupsim_version"
SECTIONS = (VERSION_KEY, "scenario", "setup", "quadrature", "stepper", "scenario_options", "output", "threads")
QUADRATURE_KEYS = ("node_count", "scheme", "span_sigmas")
STEPPER_KEYS = ("nominal_step", "deviation_amplitude", "deviation_period", "deviation_bound")
OUTPUT_KEYS = ("directory", "format")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration, SI units throughout."""

    scenario: str
    params: SetupParams
    options: Dict[str, Any]
    quadrature: QuadratureSpec
    stepper: Optional[StepperModel]
    output_dir: Path
    output_format: OutputFormat = OutputFormat.CSV
    threads: int = 1

    def with_overrides(
        self,
        scenario: Optional[str] = None,
        output_dir: Optional[Union[str, Path]] = None,
        threads: Optional[int] = None,
        output_format: Optional[Union[str, OutputFormat]] = None,
    ) -> "RunConfig":
        """Apply command-line overrides; a new scenario drops the old scenario options."""
        changes: Dict[str, Any] = {}
        if scenario is not None and scenario != self.scenario:
            _check_scenario(scenario)
            changes.update(scenario=scenario, options=SCENARIOS[scenario].default_options())
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        if threads is not None:
            changes["threads"] = _threads(threads)
        if output_format is not None:
            changes["output_format"] = _output_format(output_format)
        return replace(self, **changes)


def _check_keys(section: str, data: Mapping[str, Any], allowed) -> None:
    unknown = [key for key in data if key not in allowed]
    if unknown:
        path = ", ".join(f"{section}.{key}" if section else str(key) for key in unknown)
        raise ConfigError(f"unknown config key(s): {path}")


def _mapping(section: str, value: Any) -> Mapping[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"{section}: expected a mapping, got {type(value).__name__}")
    return value


def _check_scenario(name: Any) -> str:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r} (available: {', '.join(SCENARIOS)})")
    return name


def _threads(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"threads must be an integer >= 1, got {value!r}")
    return value


def _output_format(value: Any) -> OutputFormat:
    try:
        return OutputFormat(value)
    except ValueError:
        raise ConfigError(
            f"output.format must be one of {', '.join(f.value for f in OutputFormat)}, got {value!r}"
        ) from None


def _is_auto(value: Any) -> bool:
    return value is None or (isinstance(value, str) and value.strip().lower() == AUTO)


def _convert(kind: str, value: Any, key: str) -> Any:
    if kind == LENGTH:
        return UnitParser.length(value, key)
    if kind == ANGLE:
        return UnitParser.angle(value, key)
    if kind == NUMBER:
        return UnitParser.scalar(value, key)
    if kind == ANGULAR_FREQUENCY:
        return UnitParser.angular_frequency(value, key)
    if kind == INTEGER:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind == BOOLEAN:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true or false, got {value!r}")
        return value
    if kind == OPTIONAL_LENGTH:
        return None if _is_auto(value) else UnitParser.length(value, key)
    if kind == ANGLE_GRID:
        return _grid(ANGLE, value, key)
    if kind == NAMED_LENGTHS:
        if _is_auto(value):
            return None
        named = _mapping(key, value)
        return {str(name): UnitParser.length(length, f"{key}.{name}") for name, length in named.items()}
    raise ConfigError(f"{key}: unsupported option kind {kind!r}")


def _grid(kind: str, value: Any, key: str) -> List[float]:
    """A list of values, or a ``{start, stop, count}`` mapping expanded inclusively."""
    if isinstance(value, Mapping):
        _check_keys(key, value, ("start", "stop", "count"))
        try:
            start, stop, count = value["start"], value["stop"], value["count"]
        except KeyError as exc:
            raise ConfigError(f"{key}: grid needs start, stop and count (missing {exc.args[0]})") from None
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ConfigError(f"{key}.count must be an integer >= 1, got {count!r}")
        low = _convert(kind, start, f"{key}.start")
        high = _convert(kind, stop, f"{key}.stop")
        if count == 1:
            return [low]
        return [low + (high - low) * i / (count - 1) for i in range(count)]
    if isinstance(value, (list, tuple)) and value:
        return [_convert(kind, item, f"{key}[{i}]") for i, item in enumerate(value)]
    raise ConfigError(f"{key}: expected a non-empty list or a start/stop/count mapping")


def parse_setup(data: Mapping[str, Any]) -> SetupParams:
    """Build a validated :class:`SetupParams` from a ``setup`` section.

    Raises:
        ConfigError: On unknown keys, bad units or conflicting keys
        ValidationError: If the resolved parameter set violates an invariant
    """
    data = _mapping("setup", data)
    _check_keys("setup", data, SETUP_KINDS)
    if "coherence_length" in data and "delta_omega_s" in data:
        raise ConfigError("setup: give either coherence_length or delta_omega_s, not both")

    values: Dict[str, Any] = {}
    for key, raw in data.items():
        if key == "lambda_i" and _is_auto(raw):
            continue
        values[key] = _convert(SETUP_KINDS[key], raw, f"setup.{key}")
    if "coherence_length" in values:
        values["delta_omega_s"] = UnitParser.bandwidth_from_coherence_length(values.pop("coherence_length"))

    defaults = SetupParams()
    lambda_p = values.get("lambda_p", defaults.lambda_p)
    lambda_s = values.get("lambda_s", defaults.lambda_s)
    if "lambda_i" not in values:
        values["lambda_i"] = idler_wavelength(lambda_p, lambda_s)
    return validate(SetupParams(**values))


def parse_quadrature(data: Any) -> QuadratureSpec:
    data = _mapping("quadrature", data)
    _check_keys("quadrature", data, QUADRATURE_KEYS)
    nodes = data.get("node_count", QuadratureSpec.node_count)
    if isinstance(nodes, bool) or not isinstance(nodes, int) or nodes < MIN_QUADRATURE_NODES:
        raise ConfigError(f"quadrature.node_count must be an integer >= {MIN_QUADRATURE_NODES}, got {nodes!r}")
    try:
        scheme = QuadratureScheme(data.get("scheme", QuadratureScheme.GAUSS_HERMITE.value))
    except ValueError:
        raise ConfigError(
            f"quadrature.scheme must be one of {', '.join(s.value for s in QuadratureScheme)}"
        ) from None
    span = UnitParser.scalar(data.get("span_sigmas", QuadratureSpec.span_sigmas), "quadrature.span_sigmas")
    try:
        return QuadratureSpec(nodes, scheme, span)
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from None


def parse_stepper(data: Any) -> Optional[StepperModel]:
    if data is None:
        return None
    data = _mapping("stepper", data)
    _check_keys("stepper", data, STEPPER_KEYS)
    if "nominal_step" not in data:
        raise ConfigError("stepper.nominal_step is required")
    return StepperModel(
        nominal_step=UnitParser.length(data["nominal_step"], "stepper.nominal_step"),
        deviation_amplitude=UnitParser.length(data.get("deviation_amplitude", 0.0), "stepper.deviation_amplitude"),
        deviation_period=UnitParser.scalar(data.get("deviation_period", 40.0), "stepper.deviation_period"),
        deviation_bound=UnitParser.length(data.get("deviation_bound", DEFAULT_DEVIATION_BOUND), "stepper.deviation_bound"),
    )


def parse_options(scenario: str, data: Any) -> Dict[str, Any]:
    data = _mapping("scenario_options", data)
    schema = SCENARIOS[scenario].options
    _check_keys("scenario_options", data, schema)
    resolved = {key: _convert(schema[key].kind, value, f"scenario_options.{key}") for key, value in data.items()}
    return SCENARIOS[scenario].resolve_options(resolved)


def from_mapping(data: Any, scenario: Optional[str] = None) -> RunConfig:
    """Resolve a parsed config document.

    Args:
        data: Top-level mapping of the config file
        scenario: Scenario name overriding the one in ``data``

    Returns:
        RunConfig: Resolved configuration

    Raises:
        ConfigError: On any structural, unit or key error
        ValidationError: If the physical parameters are inconsistent
    """
    data = _mapping("config", data)
    _check_keys("", data, SECTIONS)
    name = scenario or data.get("scenario")
    if name is None:
        raise ConfigError("no scenario given in the config or on the command line")
    _check_scenario(name)
    output = _mapping("output", data.get("output"))
    _check_keys("output", output, OUTPUT_KEYS)
    options = data.get("scenario_options") if name == data.get("scenario") else None
    return RunConfig(
        scenario=name,
        params=parse_setup(data.get("setup")),
        options=parse_options(name, options),
        quadrature=parse_quadrature(data.get("quadrature")),
        stepper=parse_stepper(data.get("stepper")),
        output_dir=Path(output.get("directory", "results")),
        output_format=_output_format(output.get("format", OutputFormat.CSV.value)),
        threads=_threads(data.get("threads", 1)),
    )


def load_config(path: Union[str, Path], scenario: Optional[str] = None) -> RunConfig:
    """Read and resolve a YAML run config.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    config_path = Path(path)
    try:
        with config_path.open(encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {config_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"error parsing config file {config_path}: {exc}") from exc
    return from_mapping(data, scenario)


def default_config(scenario: str, output_dir: Union[str, Path] = "results") -> RunConfig:
    """Configuration of a scenario with every value at its default."""
    return from_mapping({"scenario": _check_scenario(scenario), "output": {"directory": str(output_dir)}})


def _option_value(value: Any) -> Any:
    if isinstance(value, tuple):
        return list(value)
    return value


def manifest(config: RunConfig, version: str) -> Dict[str, Any]:
    """Fully resolved config document; loading it reproduces the run.

    Floats are emitted in their shortest round-trip form, so every value is
    restored bit for bit.
    """
    document: Dict[str, Any] = {
        "scenario": config.scenario,
        "setup": {f.name: float(getattr(config.params, f.name)) for f in fields(config.params)},
        "quadrature": {
            "node_count": config.quadrature.node_count,
            "scheme": config.quadrature.scheme.value,
            "span_sigmas": float(config.quadrature.span_sigmas),
        },
        "scenario_options": {key: _option_value(value) for key, value in config.options.items()},
        "output": {"directory": str(config.output_dir), "format": config.output_format.value},
        "threads": config.threads,
    }
    if config.stepper is not None:
        document["stepper"] = {key: float(getattr(config.stepper, key)) for key in STEPPER_KEYS}
    return {VERSION_KEY: version, **document}
