"""Figure-level scenarios addressable by name from the command line."""
import math
from typing import Dict, List, Type

import numpy as np

from iupsim.analysis import ScanKind, fit_fringe, scan_dx
from iupsim.core import StepperModel, derived
from iupsim.errors import ConfigError
from iupsim.experiments.base_scenario import (
    ANGLE_GRID,
    BOOLEAN,
    INTEGER,
    LENGTH,
    NAMED_LENGTHS,
    NUMBER,
    OPTIONAL_LENGTH,
    BaseScenario,
    OptionSpec,
    ScenarioReport,
)
from iupsim.experiments.sweeps import (
    SweepGrid,
    apparent_macro_frequency,
    balance_density,
    extrema_tracks,
    fine_axis_period,
    fine_axis_profile,
    locate_envelopes,
    macro_micro_map,
    mixed_phase_origin,
    mixed_phase_sweep,
    row_fringes,
    standard_delays,
    visibility_extrema,
    visibility_vs_hwp,
)
from iupsim.utils.logger import get_logger

GRID_HEADER = ("macro_index", "macro_position_m", "fine_dx_m", "counts")

logger = get_logger("scenarios")


def degrees(start: float, stop: float, step: float) -> List[float]:
    """Inclusive angle grid given in degrees, returned in radians."""
    count = int(round((stop - start) / step)) + 1
    return [math.radians(start + i * step) for i in range(count)]


class DelayMapScenario(BaseScenario):
    """Macro/micro idler delay map with its two interference regions."""

    name = "fig3"
    description = "Counts over macro and fine idler delay; locates both interference regions"
    options = {
        "start": OptionSpec(LENGTH, 0.0, "commanded position of the first macro step"),
        "macro_steps": OptionSpec(INTEGER, 201, "number of macro steps"),
        "micro_span": OptionSpec(LENGTH, 14e-6, "full width of the fine axis"),
        "micro_steps": OptionSpec(INTEGER, 64, "fine-axis samples per macro step"),
        "frozen_rows": OptionSpec(BOOLEAN, True, "hold envelopes constant along each fine row"),
        "macro_scan_steps": OptionSpec(INTEGER, 4001, "samples of the single macro scan over the map range"),
    }
    default_stepper = StepperModel(nominal_step=5e-6)

    def build_map(self) -> SweepGrid:
        return macro_micro_map(
            self.params,
            self.stepper or self.default_stepper,
            self.option("macro_steps"),
            self.option("micro_span"),
            self.option("micro_steps"),
            start=self.option("start"),
            frozen_rows=self.option("frozen_rows"),
            threads=self.threads,
        )

    def run(self) -> ScenarioReport:
        stepper = self.stepper or self.default_stepper
        grid = self.build_map()
        report = ScenarioReport(self.name, self.params)

        report.tables["grid"] = (
            GRID_HEADER,
            [
                (k, float(position), float(offset), float(grid.values[k, j]))
                for k, position in enumerate(grid.axis1_values)
                for j, offset in enumerate(grid.axis2_values)
            ],
        )

        rows = fine_axis_profile(grid, self.params)
        fringes = row_fringes(grid, self.params.lambda_i)
        report.tables["profile"] = (
            ("macro_index", "macro_position_m", "mean_counts", "fringe_amplitude", "fitted_period_m", "visibility"),
            [
                (k, float(position), fringe.mean, 2.0 * abs(fringe.amplitude), metrics.fitted_period, metrics.visibility)
                for k, (position, fringe, metrics) in enumerate(zip(grid.axis1_values, fringes, rows))
            ],
        )

        envelopes = locate_envelopes(grid, self.params)
        quantities = derived(self.params)
        report.summary.update({
            "region_count": envelopes.region_count,
            "center_h_m": envelopes.center_h,
            "center_v_m": envelopes.center_v,
            "separation_m": envelopes.separation,
            "expected_separation_m": abs(quantities.ic_delay - quantities.ni_delay),
            "envelope_width_m": envelopes.width,
            "coherence_length_m": quantities.l_coh,
            "fine_axis_period_m": fine_axis_period(rows),
            "lambda_i_m": self.params.lambda_i,
        })

        end = self.option("start") + (self.option("macro_steps") - 1) * stepper.nominal_step
        half_width = 0.5 * (end - self.option("start"))
        report.scans["macro_scan"] = scan_dx(
            self.params, self.option("start") + half_width, half_width, self.option("macro_scan_steps"), ScanKind.MACRO
        )
        self.extend(report, grid)
        report.summary.update(self.oracle_check())
        logger.info(
            "%s: %d region(s), separation %.6g m, fine period %.9g m",
            self.name, envelopes.region_count, envelopes.separation, report.summary["fine_axis_period_m"],
        )
        return report

    def extend(self, report: ScenarioReport, grid: SweepGrid) -> None:
        """Hook for scenarios that derive more from the same map."""


class AliasingScenario(DelayMapScenario):
    """Delay map taken with a non-linear macro stage, showing aliased macro fringes."""

    name = "figS4"
    description = "Delay map with stepper non-linearity; apparent macro-axis fringe frequency"
    options = {
        **DelayMapScenario.options,
        "macro_steps": OptionSpec(INTEGER, 300, "number of macro steps"),
    }
    default_stepper = StepperModel(nominal_step=3.5e-6, deviation_amplitude=3e-6, deviation_period=40.0)

    def extend(self, report: ScenarioReport, grid: SweepGrid) -> None:
        stepper = self.stepper or self.default_stepper
        frequency = apparent_macro_frequency(grid, self.params.lambda_i, stepper.nominal_step)
        report.tables["apparent_frequency"] = (
            ("pair_index", "macro_position_m", "cycles_per_m"),
            [(k, float(grid.axis1_values[k]), float(f)) for k, f in enumerate(frequency)],
        )
        magnitude = np.abs(frequency[np.isfinite(frequency)])
        report.summary.update({
            "apparent_frequency_min_per_m": float(magnitude.min()) if magnitude.size else float("nan"),
            "apparent_frequency_max_per_m": float(magnitude.max()) if magnitude.size else float("nan"),
            "apparent_frequency_ratio": float(magnitude.max() / magnitude.min())
            if magnitude.size and magnitude.min() > 0 else float("inf"),
            "stepper_deviation_amplitude_m": stepper.deviation_amplitude,
        })


class HwpVisibilityScenario(BaseScenario):
    """Visibility against the output waveplate angle at three idler delays."""

    name = "fig4"
    description = "Fitted visibility vs output HWP angle at the NI, mixed and IC delays"
    options = {
        "theta2_values": OptionSpec(ANGLE_GRID, degrees(0.0, 180.0, 1.0), "output HWP angles"),
        "delays": OptionSpec(NAMED_LENGTHS, None, "named idler delays; NI, mixed and IC by default"),
    }

    def run(self) -> ScenarioReport:
        delays: Dict[str, float] = self.option("delays") or standard_delays(self.params)
        names = list(delays)
        report = ScenarioReport(self.name, self.params)
        grid = visibility_vs_hwp(self.params, list(delays.values()), self.option("theta2_values"), self.threads)
        report.grids["visibility"] = grid
        for name, curve in zip(names, grid.values):
            best = int(np.argmax(curve))
            report.summary[f"max_visibility_{name}"] = float(curve[best])
            report.summary[f"max_visibility_theta2_{name}_rad"] = float(grid.axis2_values[best])
        for name, delay in delays.items():
            scan = scan_dx(self.params, delay, 2.0 * self.params.lambda_i, 64)
            report.scans[f"scan_{name}"] = scan
            report.metrics[name] = fit_fringe(scan, self.params.lambda_i)
        report.summary.update(self.oracle_check())
        return report


class BalancingScenario(BaseScenario):
    """Balancing maps over both waveplate angles for equal and unequal gains."""

    name = "figS1"
    description = "Visibility over (theta1, theta2) at three delays, balanced and unbalanced gains"
    metric_suffixes = ("_visibility",)
    options = {
        "theta1_values": OptionSpec(ANGLE_GRID, degrees(0.0, 90.0, 5.0), "doubled-QWP angles"),
        "theta2_values": OptionSpec(ANGLE_GRID, degrees(0.0, 90.0, 5.0), "output HWP angles"),
        "gain_ratio": OptionSpec(NUMBER, 0.1, "xi_a / xi_b of the unbalanced case"),
        "delays": OptionSpec(NAMED_LENGTHS, None, "named idler delays; NI, mixed and IC by default"),
    }

    def run(self) -> ScenarioReport:
        grids = balance_density(
            self.params,
            self.option("theta1_values"),
            self.option("theta2_values"),
            self.option("delays"),
            self.option("gain_ratio"),
            self.threads,
        )
        report = ScenarioReport(self.name, self.params)
        for key, grid in grids.items():
            if key.endswith(self.metric_suffixes):
                report.grids[key] = grid
                report.summary[f"{key}_max"] = float(grid.values.max())
        self.summarize(report, grids)
        report.summary.update(self.oracle_check())
        return report

    def summarize(self, report: ScenarioReport, grids: Dict[str, SweepGrid]) -> None:
        for key, grid in grids.items():
            if key.endswith("_visibility"):
                theta1, theta2 = grid.argmax()
                report.summary[f"{key}_argmax_theta1_rad"] = theta1
                report.summary[f"{key}_argmax_theta2_rad"] = theta2


class AmplitudeScenario(BalancingScenario):
    """Fringe amplitude maps; the cost in amplitude of regaining visibility by angle."""

    name = "figS2"
    description = "Fringe amplitude over (theta1, theta2) at three delays, balanced and unbalanced gains"
    metric_suffixes = ("_amplitude", "_amplitude_both_ports")

    def summarize(self, report: ScenarioReport, grids: Dict[str, SweepGrid]) -> None:
        for delay in ("ni", "mixed", "ic"):
            visibility = grids.get(f"unbalanced_{delay}_visibility")
            if visibility is None:
                continue
            i, j = np.unravel_index(int(np.argmax(visibility.values)), visibility.values.shape)
            report.summary[f"unbalanced_{delay}_amplitude_at_max_visibility"] = float(
                grids[f"unbalanced_{delay}_amplitude"].values[i, j]
            )
            report.summary[f"unbalanced_{delay}_amplitude_both_ports_at_max_visibility"] = float(
                grids[f"unbalanced_{delay}_amplitude_both_ports"].values[i, j]
            )
            report.summary[f"balanced_{delay}_amplitude_max"] = float(grids[f"balanced_{delay}_amplitude"].values.max())


class MixingPhaseScenario(BaseScenario):
    """Mixed-region visibility curves for a range of extra V-signal paths."""

    name = "figS3"
    description = "Visibility vs output HWP angle in the mixed region while the V-signal path is swept"
    options = {
        "delta_v_start": OptionSpec(OPTIONAL_LENGTH, None, "first extra path; antiphase origin by default"),
        "delta_v_span": OptionSpec(LENGTH, 362.5e-9, "total extra-path sweep"),
        "panels": OptionSpec(INTEGER, 9, "number of curves"),
        "theta2_values": OptionSpec(ANGLE_GRID, degrees(0.0, 180.0, 0.5), "output HWP angles"),
        "delay": OptionSpec(OPTIONAL_LENGTH, None, "idler delay; envelope midpoint by default"),
    }

    def run(self) -> ScenarioReport:
        start = self.option("delta_v_start")
        start = mixed_phase_origin(self.params) if start is None else start
        panels = self.option("panels")
        if panels < 2:
            raise ConfigError(f"scenario_options.panels must be >= 2, got {panels}")
        deltas = [start + i * self.option("delta_v_span") / (panels - 1) for i in range(panels)]
        grid = mixed_phase_sweep(self.params, deltas, self.option("theta2_values"), self.option("delay"), self.threads)
        report = ScenarioReport(self.name, self.params)
        report.grids["visibility"] = grid
        extrema = visibility_extrema(grid)
        low_track, high_track = extrema_tracks(grid)
        report.tables["extrema"] = (
            ("bbo_extra_path_m", "min_theta2_rad", "max_theta2_rad", "visibility_at_first_min", "visibility_at_first_max"),
            [
                (delta, low, high, float(at_low), float(at_high))
                for delta, (low, high), at_low, at_high in zip(deltas, extrema, low_track, high_track)
            ],
        )
        report.summary.update({
            "delta_v_start_m": start,
            "delta_v_span_m": self.option("delta_v_span"),
            "panels_with_mixing_minimum": sum(1 for low, _ in extrema if not math.isnan(low)),
            "minimum_track_rises": bool(np.all(np.diff(low_track) > 0)),
            "maximum_track_falls": bool(np.all(np.diff(high_track) < 0)),
        })
        report.summary.update(self.oracle_check())
        return report


SCENARIOS: Dict[str, Type[BaseScenario]] = {
    scenario.name: scenario
    for scenario in (
        DelayMapScenario,
        HwpVisibilityScenario,
        BalancingScenario,
        AmplitudeScenario,
        MixingPhaseScenario,
        AliasingScenario,
    )
}
