"""H-infinity norm estimation on the imaginary axis and the executable
versions of the flow-norm results: the impossibility of bounding both
flow directions at once, the product bound ||C1*C2||inf <= 1, and the
coupling-ratio search that pushes ||C1||inf below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, EvaluationError
from .tf_core import AffineTerm, ControllerGains, eval_c1, eval_c2

__all__ = [
    "FrequencyGrid",
    "NormEstimate",
    "LemmaReport",
    "TuneResult",
    "DEFAULT_GRID",
    "ONE_TOLERANCE",
    "hinf_norm",
    "check_lemma1",
    "check_lemma2_product",
    "gains_for_ratio",
    "tune_alpha",
]

# slack for "<= 1" checks: the product norm attains the value 1 in limits
ONE_TOLERANCE = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FrequencyGrid:
    """Logarithmically spaced sweep of omega in rad/s."""

    omega_min: float = 1e-4
    omega_max: float = 1e4
    points: int = 2000

    def __post_init__(self):
        if not (0 < self.omega_min < self.omega_max < math.inf):
            raise ConfigError(
                f"need 0 < omega_min < omega_max, got [{self.omega_min}, {self.omega_max}]"
            )
        if self.points < 2:
            raise ConfigError(f"points must be >= 2, got {self.points}")

    def omegas(self) -> np.ndarray:
        return np.logspace(
            math.log10(self.omega_min), math.log10(self.omega_max), self.points
        )

    def denser(self, factor: int) -> "FrequencyGrid":
        return FrequencyGrid(self.omega_min, self.omega_max, self.points * factor)


DEFAULT_GRID = FrequencyGrid()


@dataclass(frozen=True)
class NormEstimate:
    """Estimated sup of |f(j*omega)| together with where it was found."""

    value: float
    argmax_omega: float
    refined: bool
    grid: FrequencyGrid


@dataclass(frozen=True)
class LemmaReport:
    c1_norm: NormEstimate
    c2_norm: NormEstimate
    c1c2_norm: NormEstimate
    both_le_one: bool
    product_le_one: bool


@dataclass(frozen=True)
class TuneResult:
    alpha: float
    c1_norm: NormEstimate
    gains: ControllerGains


def hinf_norm(
    f: Callable[[np.ndarray], np.ndarray],
    grid: FrequencyGrid = DEFAULT_GRID,
    refine_iters: int = 40,
    value_at_zero: Optional[float] = None,
    decay_order: int = 2,
) -> NormEstimate:
    """Estimate sup over omega >= 0 of |f(j*omega)|.

    ``f`` is evaluated on the grid plus omega = 0; the two grid cells
    around the discrete argmax are then sharpened by golden-section
    search (``refine_iters`` evaluations, value monotone in the count).
    ``value_at_zero`` overrides the automatic |f(0)| evaluation;
    ``decay_order`` asserts |f| decays like omega**-decay_order past the
    window, so an argmax on the right edge with no decay is an error.
    """
    omegas = grid.omegas()
    mags = np.abs(f(1j * omegas))
    if not np.all(np.isfinite(mags)):
        bad = omegas[~np.isfinite(mags)][0]
        raise EvaluationError(f"non-finite response at omega = {bad!r}", omega=float(bad))
    if value_at_zero is None:
        value_at_zero = float(abs(f(np.complex128(0.0))))
    if not np.isfinite(value_at_zero):
        raise EvaluationError("non-finite response at omega = 0", omega=0.0)

    idx = int(np.argmax(mags))
    best_value = float(mags[idx])
    best_omega = float(omegas[idx])
    at_zero = value_at_zero >= best_value
    if at_zero:
        best_value = value_at_zero
        best_omega = 0.0

    if idx == grid.points - 1 and not at_zero and decay_order <= 0:
        raise EvaluationError(
            f"argmax at omega_max = {grid.omega_max} with no decay beyond the window",
            omega=grid.omega_max,
        )

    if refine_iters <= 0:
        return NormEstimate(best_value, best_omega, False, grid)

    if at_zero:
        lo, hi = 0.0, float(omegas[min(1, grid.points - 1)])
    else:
        lo = float(omegas[idx - 1]) if idx > 0 else 0.0
        hi = float(omegas[idx + 1]) if idx < grid.points - 1 else float(omegas[-1])

    def probe(om: float) -> float:
        val = float(abs(f(np.complex128(1j * om))))
        if not np.isfinite(val):
            raise EvaluationError(f"non-finite response at omega = {om!r}", omega=om)
        return val

    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = probe(c), probe(d)
    evals = [(c, fc), (d, fd)]
    for _ in range(max(0, refine_iters - 2)):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = probe(c)
            evals.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = probe(d)
            evals.append((d, fd))
    for om, val in evals:
        if val > best_value:
            best_value, best_omega = val, om
    return NormEstimate(best_value, best_omega, True, grid)


def check_lemma1(
    g: ControllerGains,
    grid: FrequencyGrid = DEFAULT_GRID,
    refine_iters: int = 40,
) -> LemmaReport:
    """Norms of C1, C2 and their product, plus the two boundedness flags.

    With distinct stiffness gains a1 != a2 one of the two flow directions
    always amplifies (sup strictly above one), though both_le_one keeps
    its 1e-6 slack and may stay set when the excess is below it.  The
    symmetric case a1 == a2 is reported without any claim attached.
    """
    c1 = hinf_norm(lambda s: eval_c1(g, s), grid, refine_iters)
    c2 = hinf_norm(lambda s: eval_c2(g, s), grid, refine_iters)
    prod = hinf_norm(lambda s: eval_c1(g, s) * eval_c2(g, s), grid, refine_iters)
    return LemmaReport(
        c1_norm=c1,
        c2_norm=c2,
        c1c2_norm=prod,
        both_le_one=(c1.value <= 1 + ONE_TOLERANCE and c2.value <= 1 + ONE_TOLERANCE),
        product_le_one=prod.value <= 1 + ONE_TOLERANCE,
    )


def check_lemma2_product(
    g: ControllerGains,
    grid: FrequencyGrid = DEFAULT_GRID,
    refine_iters: int = 40,
) -> NormEstimate:
    """H-infinity estimate of the round-trip flow C1*C2 (always <= 1)."""
    return hinf_norm(lambda s: eval_c1(g, s) * eval_c2(g, s), grid, refine_iters)


def gains_for_ratio(base: AffineTerm, kappa: float, alpha: float) -> ControllerGains:
    """Controller with p1 = kappa/(1+alpha) * base and p2 = alpha * p1.

    The combined coupling q = (1+alpha)*p1 = kappa*base stays fixed while
    alpha shifts weight from the predecessor link to the follower link.
    """
    if not (np.isfinite(kappa) and kappa > 0):
        raise ConfigError(f"kappa must be positive, got {kappa!r}")
    if not (np.isfinite(alpha) and alpha > 0):
        raise ConfigError(f"alpha must be positive, got {alpha!r}")
    factor = kappa / (1.0 + alpha)
    return ControllerGains(base.scaled(factor), base.scaled(factor * alpha))


def tune_alpha(
    base: AffineTerm,
    kappa: float,
    alpha_range: tuple[float, float],
    grid: FrequencyGrid = DEFAULT_GRID,
    margin: float = 1e-3,
    coarse_points: int = 64,
    bisect_iters: int = 48,
) -> Optional[TuneResult]:
    """Smallest alpha in the range with ||C1||inf < 1 - margin, or None.

    Coarse geometric scan first, then bisection on the first crossing.
    The scan does not assume the norm is monotone in alpha, only that
    the qualifying set, if nonempty, contains the first crossing.
    """
    lo, hi = alpha_range
    if not (np.isfinite(lo) and np.isfinite(hi) and 1.0 <= lo <= hi):
        raise ConfigError(f"alpha_range must satisfy 1 <= lo <= hi, got {alpha_range!r}")
    if not (np.isfinite(kappa) and kappa > 0):
        raise ConfigError(f"kappa must be positive, got {kappa!r}")

    def norm_at(alpha: float) -> NormEstimate:
        g = gains_for_ratio(base, kappa, alpha)
        return hinf_norm(lambda s: eval_c1(g, s), grid)

    threshold = 1.0 - margin
    if lo == hi:
        est = norm_at(lo)
        if est.value < threshold:
            return TuneResult(lo, est, gains_for_ratio(base, kappa, lo))
        return None

    alphas = np.geomspace(lo, hi, coarse_points)
    first = None
    for i, alpha in enumerate(alphas):
        est = norm_at(float(alpha))
        if est.value < threshold:
            first = (i, float(alpha), est)
            break
    if first is None:
        return None

    i, alpha_ok, est_ok = first
    if i == 0:
        return TuneResult(alpha_ok, est_ok, gains_for_ratio(base, kappa, alpha_ok))

    alpha_bad = float(alphas[i - 1])
    for _ in range(bisect_iters):
        mid = math.sqrt(alpha_bad * alpha_ok)
        est = norm_at(mid)
        if est.value < threshold:
            alpha_ok, est_ok = mid, est
        else:
            alpha_bad = mid
    return TuneResult(alpha_ok, est_ok, gains_for_ratio(base, kappa, alpha_ok))
