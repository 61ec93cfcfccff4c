"""Unit tests for run configuration loading and the manifest."""
import math
from pathlib import Path

import pytest
import yaml

from iupsim.config import default_config, from_mapping, load_config, manifest
from iupsim.core import SetupParams, idler_wavelength
from iupsim.errors import ConfigError, ValidationError
from iupsim.oracle import QuadratureScheme
from iupsim.utils.report_writer import OutputFormat


def test_minimal_config_takes_defaults():
    config = from_mapping({"scenario": "fig4"})
    assert config.params == SetupParams()
    assert config.options["delays"] is None
    assert config.quadrature.node_count == 128
    assert config.stepper is None
    assert config.threads == 1
    assert config.output_format is OutputFormat.CSV


def test_units_are_normalized():
    config = from_mapping({
        "scenario": "fig3",
        "setup": {"theta1": "30 deg", "crystal_length": "5 mm", "coherence_length": "0.2 mm", "lambda_i": "auto"},
        "stepper": {"nominal_step": "5 um"},
        "scenario_options": {"micro_span": "14 um", "macro_steps": 101},
    })
    assert config.params.theta1 == pytest.approx(math.pi / 6, rel=1e-15)
    assert config.params.crystal_length == pytest.approx(5e-3, rel=1e-15)
    assert config.params.delta_omega_s == pytest.approx(299792458.0 / 0.2e-3, rel=1e-15)
    assert config.params.lambda_i == idler_wavelength(1064e-9, 1550e-9)
    assert config.stepper.nominal_step == pytest.approx(5e-6, rel=1e-15)
    assert config.options["micro_span"] == pytest.approx(14e-6, rel=1e-15)
    assert config.options["macro_steps"] == 101
    assert config.options["micro_steps"] == 64


def test_grid_mapping_expands_inclusively():
    config = from_mapping({
        "scenario": "fig4",
        "scenario_options": {"theta2_values": {"start": "0 deg", "stop": "90 deg", "count": 4}},
    })
    assert config.options["theta2_values"] == pytest.approx([0.0, math.pi / 6, math.pi / 3, math.pi / 2])


def test_named_delays():
    config = from_mapping({"scenario": "fig4", "scenario_options": {"delays": {"near": "0.3 mm"}}})
    assert list(config.options["delays"]) == ["near"]
    assert config.options["delays"]["near"] == pytest.approx(0.3e-3)


@pytest.mark.parametrize(
    "data, key",
    [
        ({"scenario": "fig4", "colour": 1}, "colour"),
        ({"scenario": "fig4", "setup": {"xi_c": 0.1}}, "setup.xi_c"),
        ({"scenario": "fig4", "quadrature": {"nodes": 64}}, "quadrature.nodes"),
        ({"scenario": "fig4", "scenario_options": {"panels": 3}}, "scenario_options.panels"),
        ({"scenario": "fig4", "output": {"dir": "x"}}, "output.dir"),
    ],
)
def test_unknown_keys_are_rejected_with_path(data, key):
    with pytest.raises(ConfigError, match=key):
        from_mapping(data)


@pytest.mark.parametrize(
    "data",
    [
        {"scenario": "fig9"},
        {},
        {"scenario": "fig4", "setup": {"coherence_length": "0.2 mm", "delta_omega_s": 1e12}},
        {"scenario": "fig4", "quadrature": {"node_count": 8}},
        {"scenario": "fig4", "quadrature": {"scheme": "trapezoid"}},
        {"scenario": "fig4", "threads": 0},
        {"scenario": "fig4", "output": {"format": "xml"}},
        {"scenario": "fig3", "stepper": {"deviation_amplitude": "1 um"}},
        {"scenario": "fig3", "scenario_options": {"frozen_rows": "yes"}},
        {"scenario": "fig3", "scenario_options": {"macro_steps": 10.5}},
        {"scenario": "fig4", "scenario_options": {"theta2_values": {"start": 0, "stop": 1}}},
        ["scenario", "fig4"],
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        from_mapping(data)


def test_physical_violation_is_a_validation_error():
    with pytest.raises(ValidationError) as exc_info:
        from_mapping({"scenario": "fig4", "setup": {"lambda_i": "3.4 um"}})
    assert exc_info.value.invariant == "energy_conservation"
    with pytest.raises(ValidationError):
        from_mapping({"scenario": "fig4", "setup": {"xi_a": 0.5}})


def test_scenario_override_drops_foreign_options():
    config = from_mapping({"scenario": "fig3", "scenario_options": {"macro_steps": 101}}, scenario="fig4")
    assert config.scenario == "fig4"
    assert "macro_steps" not in config.options


def test_overrides():
    config = default_config("fig4").with_overrides(output_dir="elsewhere", threads=3, output_format="structured-text")
    assert str(config.output_dir) == "elsewhere"
    assert config.threads == 3
    assert config.output_format is OutputFormat.STRUCTURED_TEXT
    assert config.with_overrides(scenario="figS3").options["panels"] == 9
    with pytest.raises(ConfigError):
        config.with_overrides(threads=-1)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("scenario: [fig4\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="parsing"):
        load_config(broken)


def test_simpson_quadrature_config():
    config = from_mapping({"scenario": "fig4", "quadrature": {"scheme": "simpson", "node_count": 512, "span_sigmas": 8}})
    assert config.quadrature.scheme is QuadratureScheme.SIMPSON
    assert config.quadrature.span_sigmas == 8.0


def test_manifest_reproduces_config(tmp_path):
    """Dumping the manifest and loading it back gives the same resolved config."""
    config = from_mapping({
        "scenario": "fig3",
        "setup": {"theta1": "30 deg", "bbo_extra_path": "300 nm"},
        "stepper": {"nominal_step": "3.5 um", "deviation_amplitude": "3 um"},
        "scenario_options": {"macro_steps": 300},
        "output": {"directory": str(tmp_path / "run")},
        "threads": 2,
    })
    document = manifest(config, "0.1.0")
    assert list(document)[:2] == ["iupsim_version", "scenario"]
    assert document["setup"]["theta1"] == pytest.approx(0.5235987755982988, rel=1e-15)
    assert document["setup"]["lambda_i"] == pytest.approx(3.3918e-6, rel=1e-3)

    path = tmp_path / "manifest.yaml"
    path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
    reloaded = load_config(path)
    assert reloaded.params == config.params
    assert reloaded.stepper == config.stepper
    assert reloaded.options == config.options
    assert reloaded.threads == 2
    assert manifest(reloaded, "0.1.0") == document


def test_bundled_configs_load():
    configs = Path(__file__).resolve().parents[2] / "configs"
    names = sorted(p.stem for p in configs.glob("*.yaml"))
    assert names == ["fig3", "fig4", "figS1", "figS2", "figS3", "figS4"]
    for name in names:
        assert load_config(configs / f"{name}.yaml").scenario == name
