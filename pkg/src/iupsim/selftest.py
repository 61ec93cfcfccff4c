"""Release-gate checks run by ``iupsim --selftest``."""
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from iupsim.analysis import visibility_at
from iupsim.closed_form import PhaseConvention, expected_counts
from iupsim.core import SetupParams, StepperModel, derived
from iupsim.errors import ConvergenceError
from iupsim.experiments.sweeps import (
    apparent_macro_frequency,
    extrema_tracks,
    fine_axis_period,
    fine_axis_profile,
    locate_envelopes,
    macro_micro_map,
    mixed_phase_origin,
    mixed_phase_sweep,
    visibility_extrema,
    visibility_vs_hwp,
)
from iupsim.oracle.propagation import (
    QuadratureScheme,
    QuadratureSpec,
    gaussian_cosine_closed,
    gaussian_cosine_identity,
    integrate_over_frequency,
)
from iupsim.utils.logger import get_logger

SEED = 20231101
EQUIVALENCE_RTOL = 1e-6
IDENTITY_TOL = 1e-9
FAR_OUTSIDE = 10.0

logger = get_logger("selftest")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class SelftestReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]


def random_params(rng: np.random.Generator, base: Optional[SetupParams] = None) -> SetupParams:
    """Random low-gain parameter set with dx near one envelope centre or far outside both."""
    base = base or SetupParams()
    params = replace(
        base,
        xi_a=float(rng.uniform(0.01, 0.1)),
        xi_b=float(rng.uniform(0.01, 0.1)),
        theta1=float(rng.uniform(0.0, math.pi / 2)),
        theta2=float(rng.uniform(0.0, math.pi / 2)),
        transmission=float(rng.uniform(0.0, 1.0)),
        bbo_extra_path=float(rng.uniform(0.0, base.lambda_s)),
    )
    quantities = derived(params)
    region = int(rng.integers(0, 3))
    if region == 0:
        dx = quantities.ni_delay + rng.uniform(-3.0, 3.0) * quantities.l_coh
    elif region == 1:
        dx = quantities.ic_delay + rng.uniform(-3.0, 3.0) * quantities.l_coh
    else:
        dx = max(quantities.ni_delay, quantities.ic_delay) + FAR_OUTSIDE * quantities.l_coh
    return replace(params, dx=float(dx))


def oracle_deviation(
    params: SetupParams, quad: QuadratureSpec, convention: PhaseConvention = PhaseConvention.SUPPLEMENT
) -> float:
    """|oracle − closed form| relative to ξ_A² + ξ_B²."""
    oracle = integrate_over_frequency(params, quad)
    closed = expected_counts(params, convention=convention)
    return abs(oracle - closed) / (params.xi_a ** 2 + params.xi_b ** 2)


def check_oracle_equivalence(quad: QuadratureSpec, convention: PhaseConvention, samples: int = 100) -> str:
    rng = np.random.default_rng(SEED)
    worst, worst_params = 0.0, None
    for _ in range(samples):
        params = random_params(rng)
        deviation = oracle_deviation(params, quad, convention)
        if deviation > worst:
            worst, worst_params = deviation, params
    assert worst <= EQUIVALENCE_RTOL, (
        f"closed form ({PhaseConvention(convention).value}) deviates from the oracle by {worst:.3e} "
        f"at dx = {worst_params.dx:.6e} m"
    )
    return f"{samples} sets, worst relative deviation {worst:.2e}"


def check_convergence(quad: QuadratureSpec) -> str:
    params = replace(SetupParams(), dx=derived(SetupParams()).ic_delay)
    try:
        value = integrate_over_frequency(params, quad, check_convergence=True)
    except ConvergenceError as exc:
        raise AssertionError(str(exc)) from exc
    return f"{quad.scheme.value} with {quad.node_count} nodes converged, N = {value:.6e}"


def check_identity(quad: QuadratureSpec, samples: int = 20) -> str:
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(samples):
        y = rng.uniform(-math.pi, math.pi)
        delta = rng.uniform(1e12, 1e14)
        a = rng.uniform(0.0, 5.0) / delta
        worst = max(worst, abs(gaussian_cosine_identity(y, a, delta, quad) - gaussian_cosine_closed(y, a, delta)))
    assert worst <= IDENTITY_TOL, f"Gaussian cosine identity off by {worst:.3e}"
    return f"{samples} triples, worst error {worst:.2e}"


def check_scheme_independence() -> str:
    params = replace(SetupParams(), dx=derived(SetupParams()).mixed_delay)
    gauss = integrate_over_frequency(params, QuadratureSpec(), check_convergence=False)
    simpson = integrate_over_frequency(
        params, QuadratureSpec(1024, QuadratureScheme.SIMPSON, 8.0), check_convergence=False
    )
    change = abs(gauss - simpson) / (params.xi_a ** 2 + params.xi_b ** 2)
    assert change <= 1e-8, f"Gauss-Hermite and Simpson differ by {change:.3e}"
    return f"relative difference {change:.2e}"


def check_ni_invariance() -> str:
    params = replace(SetupParams(), theta1=0.0)
    values = [visibility_at(replace(params, theta2=math.radians(d)), "H").visibility for d in range(0, 76, 15)]
    spread = max(values) - min(values)
    assert spread <= 1e-9, f"NI visibility varies by {spread:.3e} across theta2"
    return f"visibility {values[0]:.9f}, spread {spread:.1e}"


def check_ic_balancing() -> str:
    base = replace(SetupParams(), theta1=math.pi / 2, transmission=1.0, xi_b=0.05)
    theta2 = [math.radians(0.5 * i) for i in range(181)]
    unbalanced = replace(base, xi_a=0.1 * base.xi_b)
    delay = [derived(base).ic_delay]
    visibility = visibility_vs_hwp(unbalanced, delay, theta2).values[0]
    best = int(np.argmax(visibility))
    optimum = math.atan2(unbalanced.xi_b, unbalanced.xi_a)
    assert visibility[best] >= 0.999, f"best unbalanced visibility {visibility[best]:.6f} < 0.999"
    assert abs(theta2[best] - optimum) <= math.radians(0.5), (
        f"optimum at {math.degrees(theta2[best]):.2f} deg, expected {math.degrees(optimum):.2f} deg"
    )
    amplitude = visibility_vs_hwp(unbalanced, delay, [theta2[best]], metric="amplitude").values[0, 0]
    balanced = visibility_vs_hwp(replace(base, xi_a=base.xi_b), delay, theta2, metric="amplitude").values.max()
    assert amplitude < balanced, f"unbalanced amplitude {amplitude:.3e} not below balanced {balanced:.3e}"
    return f"visibility {visibility[best]:.5f} at {math.degrees(theta2[best]):.1f} deg, amplitude ratio {amplitude / balanced:.3f}"


def check_sqrt_t_scaling() -> str:
    worst = 0.0
    for transmission in (0.0, 0.0625, 0.25, 1.0):
        ni = replace(SetupParams(), theta1=0.0, theta2=0.0, transmission=transmission)
        ic = replace(SetupParams(), theta1=math.pi / 2, theta2=math.pi / 4, transmission=transmission)
        for params, envelope in ((ni, "H"), (ic, "V")):
            worst = max(worst, abs(visibility_at(params, envelope).visibility - math.sqrt(transmission)))
    assert worst <= 1e-6, f"visibility deviates from sqrt(T) by {worst:.3e}"
    return f"worst deviation {worst:.1e}"


def _antiphase_params() -> SetupParams:
    params = SetupParams()
    return replace(params, bbo_extra_path=mixed_phase_origin(params))


def check_two_envelopes() -> str:
    params = _antiphase_params()
    grid = macro_micro_map(params, StepperModel(10e-6), 101, 14e-6, 64)
    fit = locate_envelopes(grid, params)
    period = fine_axis_period(fine_axis_profile(grid, params))
    expected = abs(derived(params).ic_delay - derived(params).ni_delay)
    assert fit.region_count == 2, f"found {fit.region_count} interference region(s)"
    assert abs(fit.separation - expected) <= 1e-5, f"separation {fit.separation:.6e} m, expected {expected:.6e} m"
    assert abs(period / params.lambda_i - 1.0) <= 1e-3, f"fine-axis period {period:.9e} m"
    return f"separation {fit.separation * 1e3:.4f} mm, fine period {period * 1e6:.5f} um"


def check_mixed_phase() -> str:
    params = SetupParams()
    theta2 = [math.radians(0.5 * i) for i in range(360)]
    origin = mixed_phase_origin(params)
    periodic = mixed_phase_sweep(params, [origin, origin + params.lambda_s], theta2).values
    change = float(np.max(np.abs(periodic[0] - periodic[1])))
    assert change <= 1e-9, f"curves one signal wavelength apart differ by {change:.3e}"

    deltas = [origin + i * 362.5e-9 / 8 for i in range(9)]
    grid = mixed_phase_sweep(params, deltas, theta2)
    (low, high), *_ = visibility_extrema(grid)
    expected = 0.5 * math.pi - params.theta1
    assert not math.isnan(low), "antiphase curve has no mixing minimum"
    assert abs(low - expected) <= math.radians(0.5), f"antiphase minimum at {math.degrees(low):.1f} deg"
    low_track, high_track = extrema_tracks(grid)
    assert low_track[0] <= 1e-6, f"antiphase minimum visibility {low_track[0]:.3e}"
    assert np.all(np.diff(low_track) > 0), "mixing minimum does not fill in monotonically"
    assert np.all(np.diff(high_track) < 0), "maximum does not drop monotonically"
    return (
        f"minimum at {math.degrees(low):.1f} deg fills to {low_track[-1]:.3f}, "
        f"maximum at {math.degrees(high):.1f} deg drops {high_track[0]:.3f} -> {high_track[-1]:.3f}"
    )


def check_aliasing() -> str:
    params = _antiphase_params()
    stepper = StepperModel(3.5e-6, deviation_amplitude=3e-6, deviation_period=40.0)
    grid = macro_micro_map(params, stepper, 300, 14e-6, 64)
    frequency = np.abs(apparent_macro_frequency(grid, params.lambda_i, stepper.nominal_step))
    frequency = frequency[np.isfinite(frequency)]
    ratio = float(frequency.max() / frequency.min()) if frequency.min() > 0 else math.inf
    period = fine_axis_period(fine_axis_profile(grid, params))
    assert ratio >= 2.0, f"apparent macro frequency varies only by {ratio:.2f}x"
    assert abs(period / params.lambda_i - 1.0) <= 1e-3, f"fine-axis period {period:.9e} m"
    return f"apparent frequency ratio {ratio:.1f}, fine period {period * 1e6:.5f} um"


def check_determinism() -> str:
    params = SetupParams()
    theta2 = [math.radians(d) for d in range(0, 91, 10)]
    delays = [derived(params).mixed_delay]
    first = visibility_vs_hwp(params, delays, theta2).values
    second = visibility_vs_hwp(params, delays, theta2, threads=2).values
    assert first.tobytes() == second.tobytes(), "repeated sweep differs"
    return "serial and threaded sweeps bit-identical"


def run_selftest(
    convention: PhaseConvention = PhaseConvention.SUPPLEMENT,
    node_count: int = 128,
    progress: Optional[Callable[[str], None]] = None,
) -> SelftestReport:
    """Run every release-gate check.

    Args:
        convention: Idler phase convention of the closed form under test
        node_count: Gauss–Hermite nodes of the oracle
        progress: Called with each check name before it runs

    Returns:
        SelftestReport: One result per check; failures never raise
    """
    quad = QuadratureSpec(node_count)
    checks: List[Tuple[str, Callable[[], str]]] = [
        ("quadrature_convergence", lambda: check_convergence(quad)),
        ("oracle_equivalence", lambda: check_oracle_equivalence(quad, convention)),
        ("gaussian_cosine_identity", lambda: check_identity(quad)),
        ("quadrature_scheme_independence", check_scheme_independence),
        ("ni_theta2_invariance", check_ni_invariance),
        ("ic_balancing_optimum", check_ic_balancing),
        ("sqrt_t_visibility", check_sqrt_t_scaling),
        ("two_envelope_geometry", check_two_envelopes),
        ("mixed_phase_tunability", check_mixed_phase),
        ("stepper_aliasing", check_aliasing),
        ("determinism", check_determinism),
    ]
    report = SelftestReport()
    for name, check in checks:
        if progress:
            progress(name)
        started = time.perf_counter()
        try:
            detail, passed = check(), True
        except AssertionError as exc:
            detail, passed = str(exc), False
        except ConvergenceError as exc:
            detail, passed = f"non-convergence: {exc}", False
        elapsed = time.perf_counter() - started
        logger.debug("%s: %s (%.2fs) %s", name, "pass" if passed else "FAIL", elapsed, detail)
        report.checks.append(CheckResult(name, passed, detail, elapsed))
    return report
