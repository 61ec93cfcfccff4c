"""Unit tests for the simulation scenarios, run on reduced grids."""
import math

import pytest

from iupsim.core import StepperModel, derived
from iupsim.errors import ConfigError
from iupsim.experiments import SCENARIOS
from iupsim.experiments.scenarios import (
    AliasingScenario,
    AmplitudeScenario,
    BalancingScenario,
    DelayMapScenario,
    HwpVisibilityScenario,
    MixingPhaseScenario,
    degrees,
)


def test_registry_names():
    assert list(SCENARIOS) == ["fig3", "fig4", "figS1", "figS2", "figS3", "figS4"]


def test_degree_grid():
    grid = degrees(0.0, 90.0, 30.0)
    assert grid == pytest.approx([0.0, math.pi / 6, math.pi / 3, math.pi / 2])


def test_unknown_option(params):
    with pytest.raises(ConfigError, match="colour"):
        HwpVisibilityScenario(params, {"colour": "red"})


def test_delay_map(antiphase_params):
    scenario = DelayMapScenario(
        antiphase_params,
        {"macro_steps": 101, "macro_scan_steps": 2001},
        stepper=StepperModel(10e-6),
    )
    report = scenario.run()
    quantities = derived(antiphase_params)
    assert report.summary["region_count"] == 2
    assert report.summary["separation_m"] == pytest.approx(0.35e-3, abs=10e-6)
    assert report.summary["fine_axis_period_m"] == pytest.approx(antiphase_params.lambda_i, rel=1e-6)
    assert report.summary["coherence_length_m"] == pytest.approx(quantities.l_coh)
    assert report.summary["oracle_max_deviation"] <= 1e-6
    header, rows = report.tables["grid"]
    assert tuple(header) == ("macro_index", "macro_position_m", "fine_dx_m", "counts")
    assert len(rows) == 101 * 64
    assert len(report.scans["macro_scan"]) == 2001


def test_aliasing(antiphase_params):
    report = AliasingScenario(antiphase_params).run()
    assert report.summary["apparent_frequency_ratio"] >= 2.0
    assert report.summary["stepper_deviation_amplitude_m"] == 3e-6
    assert report.summary["fine_axis_period_m"] == pytest.approx(antiphase_params.lambda_i, rel=1e-3)
    assert len(report.tables["apparent_frequency"][1]) == 299


def test_hwp_visibility(params):
    report = HwpVisibilityScenario(params, {"theta2_values": degrees(0.0, 90.0, 15.0)}).run()
    grid = report.grids["visibility"]
    assert grid.values.shape == (3, 7)
    assert set(report.metrics) == {"ni", "mixed", "ic"}
    assert set(report.scans) == {"scan_ni", "scan_mixed", "scan_ic"}
    assert 0.0 <= report.summary["max_visibility_ic"] <= 1.0


def test_balancing(params):
    options = {"theta1_values": degrees(0.0, 90.0, 45.0), "theta2_values": degrees(0.0, 90.0, 45.0)}
    report = BalancingScenario(params, options).run()
    assert len(report.grids) == 6
    assert all(name.endswith("_visibility") for name in report.grids)
    assert "unbalanced_ic_visibility_argmax_theta2_rad" in report.summary


def test_amplitude(params):
    options = {"theta1_values": degrees(0.0, 90.0, 45.0), "theta2_values": degrees(0.0, 90.0, 45.0)}
    report = AmplitudeScenario(params, options).run()
    assert len(report.grids) == 9
    summary = report.summary
    assert summary["unbalanced_ic_amplitude_at_max_visibility"] <= summary["balanced_ic_amplitude_max"]


def test_mixing_phase(params):
    options = {"panels": 3, "theta2_values": degrees(0.0, 180.0, 5.0)}
    report = MixingPhaseScenario(params, options).run()
    header, rows = report.tables["extrema"]
    assert len(rows) == 3
    assert rows[0][0] == pytest.approx(300e-9, abs=1e-12)
    assert rows[-1][0] - rows[0][0] == pytest.approx(362.5e-9, rel=1e-12)
    assert header[-2:] == ("visibility_at_first_min", "visibility_at_first_max")
    assert math.degrees(rows[0][1]) == pytest.approx(60.0)
    assert report.summary["minimum_track_rises"] is True
    assert report.summary["maximum_track_falls"] is True


def test_mixing_phase_needs_two_panels(params):
    with pytest.raises(ConfigError, match="panels"):
        MixingPhaseScenario(params, {"panels": 1}).run()
