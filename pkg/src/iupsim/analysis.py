"""Fringe scans and fitted interference metrics."""
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from iupsim.closed_form import PhaseConvention, counts_vs_dx
from iupsim.core import DetectorPort, SetupParams, derived
from iupsim.errors import FitConvergenceError, FitError, ValidationError
from iupsim.utils.logger import get_logger

MIN_SCAN_STEPS = 16
MIN_SAMPLES_PER_PERIOD = 8
MIN_PERIODS = 2.0
DEGENERATE_RATIO = 1e-9
PERIOD_BOUND = 0.05
MAX_FIT_EVALUATIONS = 2000

METRICS_HEADER = (
    "label",
    "n_max",
    "n_min",
    "amplitude",
    "visibility",
    "fitted_period_m",
    "fitted_phase_rad",
    "fit_residual_rms",
    "degenerate",
)
SCAN_HEADER = ("dx_m", "counts")

logger = get_logger("analysis")


class ScanKind(str, Enum):
    """Fine scans span a few fringes; macro scans span the coherence envelopes."""

    FINE = "fine"
    MACRO = "macro"


class Envelope(str, Enum):
    H = "H"
    V = "V"


@dataclass(frozen=True)
class ScanResult:
    """Detector expectation sampled along the idler displacement.

    Attributes:
        dx: Displacements in meters, strictly increasing
        counts: Photon-number expectation per sample, non-negative
        params: Parameter set the scan was taken with
        kind: Fine or macro scan
        port: PBS output port that was recorded
    """

    dx: np.ndarray
    counts: np.ndarray
    params: SetupParams
    kind: ScanKind = ScanKind.FINE
    port: DetectorPort = DetectorPort.H

    def __post_init__(self):
        dx = np.asarray(self.dx, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if dx.ndim != 1 or dx.shape != counts.shape:
            raise ValueError(f"dx and counts must be 1-D of equal length, got {dx.shape} and {counts.shape}")
        if dx.size > 1 and np.any(np.diff(dx) <= 0):
            raise ValueError("scan displacements must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("scan counts must be non-negative")
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "kind", ScanKind(self.kind))
        object.__setattr__(self, "port", DetectorPort(self.port))

    def __len__(self) -> int:
        return self.dx.size

    @property
    def span(self) -> float:
        return float(self.dx[-1] - self.dx[0]) if self.dx.size else 0.0

    def rows(self):
        return list(zip(self.dx.tolist(), self.counts.tolist()))


@dataclass(frozen=True)
class FringeMetrics:
    """Fitted fringe of the form C + (A/2)·cos(2π·dx/period + phase)."""

    n_max: float
    n_min: float
    amplitude: float
    visibility: float
    fitted_period: float
    fitted_phase: float
    fit_residual_rms: float
    degenerate: bool = False

    def as_row(self, label: str) -> Tuple:
        return (
            label,
            self.n_max,
            self.n_min,
            self.amplitude,
            self.visibility,
            self.fitted_period,
            self.fitted_phase,
            self.fit_residual_rms,
            self.degenerate,
        )


def scan_dx(
    params: SetupParams,
    center: float,
    half_width: float,
    steps: int,
    kind: ScanKind = ScanKind.FINE,
    port: DetectorPort = DetectorPort.H,
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
) -> ScanResult:
    """Sample the detector expectation uniformly over an idler displacement range.

    A fine scan holds the coherence envelopes at their value at ``center``
    and varies only the fringe phase; a macro scan evaluates the full
    expression at every sample.

    Args:
        params: Parameter set; its own ``dx`` is ignored
        center: Scan centre in meters
        half_width: Half the scanned range in meters
        steps: Number of samples
        kind: Fine or macro scan
        port: PBS output port
        convention: Idler phase sign convention

    Returns:
        ScanResult: Samples over [center − half_width, center + half_width]

    Raises:
        ValidationError: If steps < 16 or half_width <= 0
    """
    if int(steps) != steps or steps < MIN_SCAN_STEPS:
        raise ValidationError("scan_steps", f"steps must be an integer >= {MIN_SCAN_STEPS}, got {steps!r}")
    if not half_width > 0:
        raise ValidationError("scan_half_width", f"half_width must be > 0, got {half_width!r}")
    kind = ScanKind(kind)
    dx = np.linspace(center - half_width, center + half_width, int(steps))
    envelope_dx = center if kind is ScanKind.FINE else None
    counts = counts_vs_dx(params, dx, envelope_dx=envelope_dx, port=port, convention=convention)
    return ScanResult(dx, counts, params, kind, port)


def _sinusoid(x: np.ndarray, offset: float, a: float, b: float, scale: float, period: float) -> np.ndarray:
    phase = 2.0 * np.pi * x / (period * scale)
    return offset + a * np.cos(phase) + b * np.sin(phase)


def _wrap(phase: float) -> float:
    """Wrap an angle into (−π, π]."""
    wrapped = math.remainder(phase, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def _degenerate(counts: np.ndarray, lambda_hint: float, level: float) -> FringeMetrics:
    rms = float(np.sqrt(np.mean((counts - level) ** 2)))
    return FringeMetrics(level, level, 0.0, 0.0, lambda_hint, 0.0, rms, degenerate=True)


def fit_fringe(scan: ScanResult, lambda_hint: float) -> FringeMetrics:
    """Fit an offset sinusoid to a fine scan.

    The fit is seeded by a linear least-squares projection at
    ``lambda_hint`` and then refined by bounded nonlinear least squares over
    offset, quadratures and period (within ±5 % of the hint).

    Args:
        scan: Fine scan spanning at least two periods
        lambda_hint: Expected fringe period in meters

    Returns:
        FringeMetrics: Fitted metrics; ``degenerate`` is set and the
        visibility is 0 when the fringe amplitude is below 1e-9 of the mean

    Raises:
        FitError: If the scan is not a fine scan, is too short or is
            undersampled
        FitConvergenceError: If the least-squares iteration budget runs out
    """
    if scan.kind is not ScanKind.FINE:
        raise FitError(f"fit_fringe needs a fine scan, got a {scan.kind.value} scan")
    if not lambda_hint > 0:
        raise FitError(f"lambda_hint must be > 0, got {lambda_hint!r}")
    if scan.span < MIN_PERIODS * lambda_hint * (1.0 - 1e-12):
        raise FitError(
            f"scan spans {scan.span / lambda_hint:.3f} periods, at least {MIN_PERIODS:g} are needed"
        )
    samples_per_period = (len(scan) - 1) * lambda_hint / scan.span
    if samples_per_period < MIN_SAMPLES_PER_PERIOD:
        raise FitError(
            f"scan has {samples_per_period:.2f} samples per period, at least {MIN_SAMPLES_PER_PERIOD} are needed"
        )

    counts = scan.counts
    mean = float(np.mean(counts))
    if not mean > 0:
        logger.debug("degenerate fit: mean counts %.3e", mean)
        return _degenerate(counts, lambda_hint, max(mean, 0.0))

    x = scan.dx - 0.5 * (scan.dx[0] + scan.dx[-1])
    y = counts / mean
    phase = 2.0 * np.pi * x / lambda_hint
    design = np.column_stack([np.ones_like(x), np.cos(phase), np.sin(phase)])
    (offset, a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    if 2.0 * math.hypot(a, b) < DEGENERATE_RATIO * abs(offset):
        logger.debug("degenerate fit: relative amplitude %.3e", 2.0 * math.hypot(a, b) / abs(offset))
        return _degenerate(counts, lambda_hint, mean)

    def model(xs, c, qa, qb, scale):
        return _sinusoid(xs, c, qa, qb, scale, lambda_hint)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(
                model,
                x,
                y,
                p0=[offset, a, b, 1.0],
                bounds=([-np.inf, -np.inf, -np.inf, 1.0 - PERIOD_BOUND], [np.inf, np.inf, np.inf, 1.0 + PERIOD_BOUND]),
                method="trf",
                ftol=1e-12,
                xtol=1e-12,
                gtol=1e-12,
                max_nfev=MAX_FIT_EVALUATIONS,
            )
    except RuntimeError as exc:
        raise FitConvergenceError(f"fringe fit did not converge: {exc}") from exc

    offset, a, b, scale = (float(value) for value in popt)
    period = lambda_hint * scale
    half_amplitude = math.hypot(a, b) * mean
    center = offset * mean
    n_max = center + half_amplitude
    n_min = max(center - half_amplitude, 0.0)
    amplitude = n_max - n_min
    total = n_max + n_min
    visibility = min(amplitude / total, 1.0) if total > 0 else 0.0
    fitted_phase = _wrap(-2.0 * math.pi * float(0.5 * (scan.dx[0] + scan.dx[-1])) / period - math.atan2(b, a))
    residual = counts - mean * _sinusoid(x, offset, a, b, scale, lambda_hint)
    rms = float(np.sqrt(np.mean(residual ** 2)))
    logger.debug(
        "fringe fit: visibility %.9f period %.9e phase %.6f rms %.3e", visibility, period, fitted_phase, rms
    )
    return FringeMetrics(n_max, n_min, amplitude, visibility, period, fitted_phase, rms)


def envelope_center(params: SetupParams, envelope: Union[Envelope, str, float]) -> float:
    """Idler displacement selected by an envelope name or given directly in meters."""
    if isinstance(envelope, (int, float)) and not isinstance(envelope, bool):
        return float(envelope)
    quantities = derived(params)
    return quantities.ni_delay if Envelope(envelope) is Envelope.H else quantities.ic_delay


def visibility_at(
    params: SetupParams,
    envelope: Union[Envelope, str, float] = Envelope.H,
    steps: int = 64,
    port: DetectorPort = DetectorPort.H,
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
) -> FringeMetrics:
    """Fitted fringe metrics of a 4λ_i fine scan centred on one envelope.

    Args:
        params: Parameter set
        envelope: ``"H"`` (nonlinear-interferometer term), ``"V"``
            (induced-coherence term) or a displacement in meters
        steps: Samples in the scan
        port: PBS output port
        convention: Idler phase sign convention

    Returns:
        FringeMetrics: Metrics of the fitted fringe
    """
    center = envelope_center(params, envelope)
    scan = scan_dx(params, center, 2.0 * params.lambda_i, steps, ScanKind.FINE, port, convention)
    return fit_fringe(scan, params.lambda_i)
