"""Parameter sweeps behind the scenarios: delay maps, visibility curves and balancing grids."""
import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks

from iupsim.analysis import MIN_SAMPLES_PER_PERIOD, FringeMetrics, ScanKind, ScanResult, fit_fringe, visibility_at
from iupsim.closed_form import counts_vs_dx
from iupsim.core import DetectorPort, SetupParams, StepperModel, derived
from iupsim.errors import FitConvergenceError, FitError, ValidationError
from iupsim.utils.logger import get_logger
from iupsim.utils.parallel import parallel_map

MIN_MICRO_STEPS = 16
RESOLVABLE_RATIO = 1e-6
REGION_PROMINENCE = 0.1
SINGLE_REGION_RMS = 1e-4
MIN_BBO_SWEEP = 362.5e-9
VISIBILITY_SLACK = 1e-9

logger = get_logger("experiments")


class Metric(str, Enum):
    COUNTS = "counts"
    VISIBILITY = "visibility"
    AMPLITUDE = "amplitude"


@dataclass(frozen=True)
class SweepGrid:
    """Scalar metric over two swept axes.

    ``values[i, j]`` belongs to ``axis1_values[i]`` and ``axis2_values[j]``.
    """

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    values: np.ndarray
    metric: Metric

    def __post_init__(self):
        axis1 = np.asarray(self.axis1_values, dtype=float)
        axis2 = np.asarray(self.axis2_values, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (axis1.size, axis2.size):
            raise ValueError(f"grid values have shape {values.shape}, axes give {(axis1.size, axis2.size)}")
        metric = Metric(self.metric)
        if metric is Metric.VISIBILITY and values.size and (values.min() < 0 or values.max() > 1.0 + VISIBILITY_SLACK):
            raise ValueError("visibility values must lie in [0, 1]")
        object.__setattr__(self, "axis1_values", axis1)
        object.__setattr__(self, "axis2_values", axis2)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "metric", metric)

    @property
    def header(self) -> Tuple[str, str, str]:
        return (self.axis1_name, self.axis2_name, self.metric.value)

    def rows(self) -> List[Tuple[float, float, float]]:
        """Cells in row-major order."""
        return [
            (float(a1), float(a2), float(self.values[i, j]))
            for i, a1 in enumerate(self.axis1_values)
            for j, a2 in enumerate(self.axis2_values)
        ]

    def argmax(self) -> Tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return float(self.axis1_values[i]), float(self.axis2_values[j])


@dataclass(frozen=True)
class RowFringe:
    """Fringe of one macro row, projected at the idler wavelength."""

    mean: float
    amplitude: complex


@dataclass(frozen=True)
class EnvelopeFit:
    """Two Gaussian envelopes fitted to the fringe amplitude along the macro axis."""

    center_h: float
    center_v: float
    width: float
    amplitude_h: float
    amplitude_v: float
    mixing_phase: float
    residual_rms: float
    region_count: int

    @property
    def separation(self) -> float:
        return abs(self.center_v - self.center_h)


def macro_micro_map(
    params: SetupParams,
    stepper: StepperModel,
    macro_steps: int,
    micro_span: float,
    micro_steps: int,
    start: float = 0.0,
    frozen_rows: bool = True,
    port: DetectorPort = DetectorPort.H,
    threads: int = 1,
) -> SweepGrid:
    """Counts over macro stage steps and fine offsets around each step.

    Row k sits at the stage's actual position ``start + stepper.position(k)``
    but is labelled with the commanded position ``start + k * nominal_step``.
    Each row is a fine scan: with ``frozen_rows`` its coherence envelopes are
    taken at the row's actual position.

    Args:
        params: Parameter set; its own ``dx`` is ignored
        stepper: Macro stage model
        macro_steps: Number of rows
        micro_span: Full width of the fine axis in meters
        micro_steps: Samples along the fine axis
        start: Commanded position of row 0
        frozen_rows: Hold the envelopes constant along each row
        port: PBS output port
        threads: Worker threads for row evaluation

    Returns:
        SweepGrid: ``macro_position_m`` × ``fine_dx_m`` grid of counts

    Raises:
        ValidationError: If the fine axis spans less than 2λ_i, has too few
            samples, or the macro range misses an envelope centre
    """
    if micro_span < 2.0 * params.lambda_i:
        raise ValidationError(
            "micro_span", f"micro_span {micro_span!r} must be at least 2*lambda_i = {2.0 * params.lambda_i!r}"
        )
    if int(micro_steps) != micro_steps or micro_steps < MIN_MICRO_STEPS:
        raise ValidationError("micro_steps", f"micro_steps must be an integer >= {MIN_MICRO_STEPS}, got {micro_steps!r}")
    samples_per_period = (micro_steps - 1) * params.lambda_i / micro_span
    if samples_per_period < MIN_SAMPLES_PER_PERIOD:
        raise ValidationError(
            "micro_steps",
            f"{micro_steps} fine samples over {micro_span!r} m give {samples_per_period:.2f} samples per idler period, "
            f"at least {MIN_SAMPLES_PER_PERIOD} are needed",
        )
    if int(macro_steps) != macro_steps or macro_steps < 2:
        raise ValidationError("macro_steps", f"macro_steps must be an integer >= 2, got {macro_steps!r}")
    quantities = derived(params)
    end = start + (macro_steps - 1) * stepper.nominal_step
    for name, center in (("ni_delay", quantities.ni_delay), ("ic_delay", quantities.ic_delay)):
        if not start <= center <= end:
            raise ValidationError(
                "macro_coverage", f"macro range [{start:.6g}, {end:.6g}] m misses the {name} envelope at {center:.6g} m"
            )

    indices = np.arange(int(macro_steps))
    commanded = start + indices * stepper.nominal_step
    actual = start + stepper.position(indices)
    offsets = np.linspace(-0.5 * micro_span, 0.5 * micro_span, int(micro_steps))

    def row(position: float) -> np.ndarray:
        envelope_dx = position if frozen_rows else None
        return counts_vs_dx(params, position + offsets, envelope_dx=envelope_dx, port=port)

    values = np.vstack(parallel_map(row, actual.tolist(), threads))
    logger.debug("macro/micro map: %d x %d cells", values.shape[0], values.shape[1])
    return SweepGrid("macro_position_m", commanded, "fine_dx_m", offsets, values, Metric.COUNTS)


def row_fringes(grid: SweepGrid, lambda_i: float) -> List[RowFringe]:
    """Project every row of a delay map onto a fringe of period λ_i.

    The complex amplitude ``z`` of a row satisfies
    ``counts ≈ mean + Re(z · exp(2πi·offset/λ_i))``.
    """
    phase = 2.0 * np.pi * grid.axis2_values / lambda_i
    design = np.column_stack([np.ones_like(phase), np.cos(phase), np.sin(phase)])
    coefficients, *_ = np.linalg.lstsq(design, grid.values.T, rcond=None)
    return [RowFringe(float(c), complex(a, -b)) for c, a, b in coefficients.T]


def fine_axis_profile(grid: SweepGrid, params: SetupParams) -> List[FringeMetrics]:
    """Fit the fringe along the fine axis of every row of a delay map made with ``params``."""
    metrics = []
    for position, counts in zip(grid.axis1_values, grid.values):
        scan = ScanResult(position + grid.axis2_values, counts, params, ScanKind.FINE)
        metrics.append(fit_fringe(scan, params.lambda_i))
    return metrics


def fine_axis_period(metrics: Sequence[FringeMetrics], min_fraction: float = 0.5) -> float:
    """Amplitude-weighted mean fitted period over rows whose amplitude is at least ``min_fraction`` of the largest."""
    amplitudes = np.array([m.amplitude for m in metrics])
    periods = np.array([m.fitted_period for m in metrics])
    keep = (amplitudes >= min_fraction * amplitudes.max()) & np.array([not m.degenerate for m in metrics])
    if not np.any(keep):
        raise FitError("no row of the map carries a resolvable fringe")
    return float(np.average(periods[keep], weights=amplitudes[keep]))


def _two_envelopes(x, amp_h, amp_v, alpha, center_h, center_v, width):
    g_h = np.exp(-((x - center_h) ** 2) / (2.0 * width ** 2))
    g_v = np.exp(-((x - center_v) ** 2) / (2.0 * width ** 2))
    power = (amp_h * g_h) ** 2 + (amp_v * g_v) ** 2 + 2.0 * amp_h * amp_v * g_h * g_v * np.cos(alpha)
    return np.sqrt(np.maximum(power, 0.0))


def _one_envelope(x, amp, center, width):
    return amp * np.exp(-((x - center) ** 2) / (2.0 * width ** 2))


def _single_envelope(x: np.ndarray, y: np.ndarray, peak: float, l_coh: float, params: SetupParams) -> EnvelopeFit:
    top = int(np.argmax(y))
    p0 = [1.0, float(x[top]), 1.0]
    bounds = ([0.0, float(x[0]), 0.1], [np.inf, float(x[-1]), 10.0])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_one_envelope, x, y, p0=p0, bounds=bounds, method="trf",
                                ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=5000)
    except RuntimeError as exc:
        raise FitConvergenceError(f"single-envelope fit did not converge: {exc}") from exc

    amp, center, width = (float(v) for v in popt)
    cost = float(np.sum((_one_envelope(x, *popt) - y) ** 2))
    center_m = center * l_coh
    quantities = derived(params)
    near_h = abs(center_m - quantities.ni_delay) <= abs(center_m - quantities.ic_delay)
    return EnvelopeFit(
        center_h=center_m if near_h else math.nan,
        center_v=math.nan if near_h else center_m,
        width=width * l_coh,
        amplitude_h=amp * peak if near_h else 0.0,
        amplitude_v=0.0 if near_h else amp * peak,
        mixing_phase=math.nan,
        residual_rms=math.sqrt(cost / y.size) * peak,
        region_count=1,
    )


def locate_envelopes(grid: SweepGrid, params: SetupParams) -> EnvelopeFit:
    """Fit the centres of the two interference regions of a delay map.

    The fringe amplitude along the macro axis is modelled as the modulus of
    two Gaussian envelopes of common width that add with a free relative
    phase. Positions are the commanded ones.

    A map with one region (e.g. θ₁ = 0, where the V-signal term vanishes)
    is fitted with a single Gaussian when that fits to within
    ``SINGLE_REGION_RMS`` of the peak. The fitted centre is assigned to
    the nearer of the NI and IC delays, and the other envelope has zero
    amplitude and a NaN centre.

    Raises:
        FitError: If the map shows no fringe at all
        FitConvergenceError: If the envelope fit does not converge
    """
    l_coh = derived(params).l_coh
    fringes = row_fringes(grid, params.lambda_i)
    profile = np.array([abs(f.amplitude) for f in fringes])
    peak = profile.max()
    if not peak > 0:
        raise FitError("delay map carries no fringe")
    x = grid.axis1_values / l_coh
    y = profile / peak

    peaks, properties = find_peaks(y, prominence=REGION_PROMINENCE)
    single = None
    if peaks.size < 2:
        try:
            single = _single_envelope(x, y, peak, l_coh, params)
        except FitConvergenceError as exc:
            logger.debug("%s", exc)
        if single is not None and single.residual_rms <= SINGLE_REGION_RMS * peak:
            return single
    if peaks.size >= 2:
        strongest = peaks[np.argsort(properties["prominences"])[-2:]]
        guess_h, guess_v = sorted(float(x[i]) for i in strongest)
    else:
        centroid = float(np.average(x, weights=y))
        guess_h, guess_v = centroid - 0.5, centroid + 0.5
        guess_h, guess_v = float(np.clip(guess_h, x[0], x[-1])), float(np.clip(guess_v, x[0], x[-1]))
    amp_h = float(np.interp(guess_h, x, y))
    amp_v = float(np.interp(guess_v, x, y))
    lower = [0.0, 0.0, -2.0 * np.pi, x[0], x[0], 0.1]
    upper = [np.inf, np.inf, 2.0 * np.pi, x[-1], x[-1], 10.0]

    best = None
    for alpha in (0.0, np.pi):
        p0 = [max(amp_h, 1e-3), max(amp_v, 1e-3), alpha, guess_h, guess_v, 1.0]
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", OptimizeWarning)
                popt, _ = curve_fit(_two_envelopes, x, y, p0=p0, bounds=(lower, upper), method="trf",
                                    ftol=1e-14, xtol=1e-14, gtol=1e-14, max_nfev=5000)
        except RuntimeError as exc:
            logger.debug("envelope fit from alpha=%.3f failed: %s", alpha, exc)
            continue
        cost = float(np.sum((_two_envelopes(x, *popt) - y) ** 2))
        if best is None or cost < best[0]:
            best = (cost, popt)
    if best is None:
        if single is not None:
            return single
        raise FitConvergenceError("two-envelope fit did not converge from any start")

    cost, (a_h, a_v, alpha, c_h, c_v, width) = best
    if c_h > c_v:
        a_h, a_v, c_h, c_v = a_v, a_h, c_v, c_h
    return EnvelopeFit(
        center_h=float(c_h * l_coh),
        center_v=float(c_v * l_coh),
        width=float(width * l_coh),
        amplitude_h=float(a_h * peak),
        amplitude_v=float(a_v * peak),
        mixing_phase=float(math.remainder(alpha, 2.0 * math.pi)),
        residual_rms=float(math.sqrt(cost / y.size) * peak),
        region_count=int(peaks.size),
    )


def apparent_macro_frequency(grid: SweepGrid, lambda_i: float, nominal_step: float) -> np.ndarray:
    """Fringe frequency seen along the macro axis, in cycles per meter of commanded travel.

    Entry k compares rows k and k+1. The fringe phase advance between rows
    is only known modulo one cycle, so a fringe sampled at steps close to a
    multiple of λ_i appears at a low, aliased frequency. Entries are NaN
    where either row carries no resolvable fringe.
    """
    fringes = row_fringes(grid, lambda_i)
    phases = np.array([np.angle(f.amplitude) for f in fringes])
    resolvable = np.array([abs(f.amplitude) > RESOLVABLE_RATIO * abs(f.mean) for f in fringes])
    advance = np.remainder(np.diff(phases) + np.pi, 2.0 * np.pi) - np.pi
    frequency = advance / (2.0 * np.pi * nominal_step)
    frequency[~(resolvable[:-1] & resolvable[1:])] = np.nan
    return frequency


def visibility_vs_hwp(
    params: SetupParams,
    delays: Sequence[float],
    theta2_values: Sequence[float],
    threads: int = 1,
    metric: Metric = Metric.VISIBILITY,
) -> SweepGrid:
    """Fitted visibility (or amplitude) against the output waveplate angle, one curve per delay."""
    delays = [float(d) for d in delays]
    theta2_values = [float(t) for t in theta2_values]
    cells = [(d, t) for d in delays for t in theta2_values]

    def evaluate(cell):
        delay, theta2 = cell
        return visibility_at(replace(params, theta2=theta2), delay)

    metrics = parallel_map(evaluate, cells, threads)
    values = np.array([getattr(m, Metric(metric).value) for m in metrics]).reshape(len(delays), len(theta2_values))
    return SweepGrid("delay_m", delays, "theta2_rad", theta2_values, values, metric)


def standard_delays(params: SetupParams) -> Dict[str, float]:
    """Delays of the nonlinear-interferometer envelope, the midpoint and the induced-coherence envelope."""
    quantities = derived(params)
    return {"ni": quantities.ni_delay, "mixed": quantities.mixed_delay, "ic": quantities.ic_delay}


def balance_density(
    params: SetupParams,
    theta1_values: Sequence[float],
    theta2_values: Sequence[float],
    delays: Optional[Dict[str, float]] = None,
    gain_ratio: float = 0.1,
    threads: int = 1,
) -> Dict[str, SweepGrid]:
    """Visibility and amplitude over both waveplate angles for balanced and unbalanced gains.

    The balanced case uses ξ_A = ξ_B = ``params.xi_b``; the unbalanced case
    ξ_A = gain_ratio·ξ_B. For the unbalanced case the fringe amplitude summed
    over both PBS ports is reported as well.

    Args:
        params: Parameter set supplying ξ_B, T and the crystal
        theta1_values: Doubled-QWP angles in radians
        theta2_values: Output HWP angles in radians
        delays: Named delays, by default ``ni``, ``mixed`` and ``ic``
        gain_ratio: ξ_A/ξ_B of the unbalanced case
        threads: Worker threads

    Returns:
        Dict[str, SweepGrid]: Keyed ``<balance>_<delay>_<metric>``, e.g.
        ``unbalanced_ic_visibility`` or ``unbalanced_ic_amplitude_both_ports``
    """
    if not 0.0 <= gain_ratio <= 1.0:
        raise ValidationError("gain_ratio", f"gain_ratio must lie in [0, 1], got {gain_ratio!r}")
    delays = delays or standard_delays(params)
    theta1_values = [float(t) for t in theta1_values]
    theta2_values = [float(t) for t in theta2_values]
    shape = (len(theta1_values), len(theta2_values))
    balances = {
        "balanced": replace(params, xi_a=params.xi_b),
        "unbalanced": replace(params, xi_a=gain_ratio * params.xi_b),
    }

    grids: Dict[str, SweepGrid] = {}
    for balance, balanced_params in balances.items():
        for delay_name, delay in delays.items():
            cells = [(t1, t2) for t1 in theta1_values for t2 in theta2_values]

            def evaluate(cell, base=balanced_params, center=delay, both=(balance == "unbalanced")):
                cell_params = replace(base, theta1=cell[0], theta2=cell[1])
                h = visibility_at(cell_params, center)
                v_amplitude = visibility_at(cell_params, center, port=DetectorPort.V).amplitude if both else 0.0
                return h.visibility, h.amplitude, h.amplitude + v_amplitude

            results = np.array(parallel_map(evaluate, cells, threads))
            prefix = f"{balance}_{delay_name}"
            grids[f"{prefix}_visibility"] = SweepGrid(
                "theta1_rad", theta1_values, "theta2_rad", theta2_values, results[:, 0].reshape(shape), Metric.VISIBILITY
            )
            grids[f"{prefix}_amplitude"] = SweepGrid(
                "theta1_rad", theta1_values, "theta2_rad", theta2_values, results[:, 1].reshape(shape), Metric.AMPLITUDE
            )
            if balance == "unbalanced":
                grids[f"{prefix}_amplitude_both_ports"] = SweepGrid(
                    "theta1_rad", theta1_values, "theta2_rad", theta2_values, results[:, 2].reshape(shape),
                    Metric.AMPLITUDE,
                )
    return grids


def mixed_phase_origin(params: SetupParams) -> float:
    """Smallest non-negative δ_V at which the two cross terms are in antiphase at the H port.

    There the H-signal and V-signal phases differ by a whole number of
    cycles and the mixed-region visibility dips to zero at one θ₂.
    """
    cycles = params.crystal_length * (params.n_vs - params.n_hs) / params.lambda_s
    return params.lambda_s * (math.ceil(cycles) - cycles)


def mixed_phase_sweep(
    params: SetupParams,
    delta_v_values: Sequence[float],
    theta2_values: Sequence[float],
    delay: Optional[float] = None,
    threads: int = 1,
) -> SweepGrid:
    """Visibility against θ₂ for a family of extra V-signal paths δ_V.

    Args:
        params: Parameter set; its ``bbo_extra_path`` is replaced per row
        delta_v_values: Extra paths in meters, spanning at least 362.5 nm
        theta2_values: Output HWP angles in radians
        delay: Idler delay; the envelope midpoint by default
        threads: Worker threads

    Returns:
        SweepGrid: ``bbo_extra_path_m`` × ``theta2_rad`` visibilities
    """
    delta_v_values = [float(d) for d in delta_v_values]
    if not delta_v_values or max(delta_v_values) - min(delta_v_values) < MIN_BBO_SWEEP * (1.0 - 1e-9):
        raise ValidationError(
            "bbo_sweep_span", f"delta_v_values must span at least {MIN_BBO_SWEEP:g} m"
        )
    delay = derived(params).mixed_delay if delay is None else float(delay)
    theta2_values = [float(t) for t in theta2_values]
    cells = [(d, t) for d in delta_v_values for t in theta2_values]

    def evaluate(cell):
        return visibility_at(replace(params, bbo_extra_path=cell[0], theta2=cell[1]), delay).visibility

    values = np.array(parallel_map(evaluate, cells, threads)).reshape(len(delta_v_values), len(theta2_values))
    return SweepGrid("bbo_extra_path_m", delta_v_values, "theta2_rad", theta2_values, values, Metric.VISIBILITY)


def visibility_extrema(grid: SweepGrid) -> List[Tuple[float, float]]:
    """θ₂ of the mixing minimum and of the global maximum of each visibility curve.

    The mixing minimum is the deepest local minimum that is not the forced
    zero at cos θ₂ = 0, where the H port sees no second-pass light; it is
    NaN for curves without one.
    """
    theta2 = grid.axis2_values
    positions = []
    for curve in grid.values:
        low, high = _extrema_indices(curve, theta2)
        positions.append((float("nan") if low is None else float(theta2[low]), float(theta2[high])))
    return positions


def _extrema_indices(curve: np.ndarray, theta2: np.ndarray) -> Tuple[Optional[int], int]:
    step = float(np.min(np.diff(theta2))) if theta2.size > 1 else 0.0
    trivial = np.abs(np.cos(theta2)) <= step
    minima = [int(i) for i in find_peaks(-curve)[0] if not trivial[i]]
    low = min(minima, key=lambda i: curve[i]) if minima else None
    return low, int(np.argmax(curve))


def extrema_tracks(grid: SweepGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Visibility of every curve at the θ₂ of the first curve's mixing minimum and of its maximum.

    The curves depend on δ_V only through the cosine of the H/V signal phase
    difference, so they are even about the antiphase origin. Moving away from
    it the mixing minimum fills in and the maximum drops, while their
    positions move by about a degree and the minimum vanishes part way through
    a 362.5 nm sweep. These two tracks are what changes monotonically.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Minimum and maximum tracks, one value
        per curve; the minimum track is NaN if the first curve has no mixing
        minimum
    """
    low, high = _extrema_indices(grid.values[0], grid.axis2_values)
    low_track = np.full(grid.values.shape[0], np.nan) if low is None else grid.values[:, low].copy()
    return low_track, grid.values[:, high].copy()
