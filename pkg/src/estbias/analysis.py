"""Closed-form results and solvers for bias measures.

Includes the second-order approximation of E[X/Y], the bias mean RE_act
assigns to perfect mean estimates, zero-bias estimates, scans that find which
functional a measure rewards, and the PERT three-point mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .distributions import DiscreteEffort, EffortDistribution
from .measures import (
    BiasMeasure,
    DomainError,
    Functional,
    aggregate,
    scores,
)
from .simulation import (
    SimulationConfig,
    _check_grid,
    draw_actuals,
    exact_expected_bias,
)

MATCH_RTOL = 0.01
ROOT_RTOL = 1e-6


class RootFindingError(RuntimeError):
    """No sign change found; ``interval`` holds the scanned range."""

    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} (scanned [{interval[0]:.6g}, {interval[1]:.6g}])")
        self.interval = interval


class Method(str, enum.Enum):
    EXACT = "Exact"
    ROOT_FIND = "RootFind"
    GRID_SCAN = "GridScan"


@dataclass(frozen=True)
class RatioMoments:
    mu_x: float
    mu_y: float
    var_y: float
    cov_xy: float = 0.0


def ratio_expectation_approx(m: RatioMoments) -> float:
    """Second-order Taylor approximation of E[X/Y]:

        mu_x/mu_y - cov(X,Y)/mu_y**2 + var(Y)*mu_x/mu_y**3
    """
    if m.mu_y == 0:
        raise DomainError("mu_y must be non-zero")
    if m.var_y < 0:
        raise DomainError(f"var_y must be non-negative, got {m.var_y}")
    return m.mu_x / m.mu_y - m.cov_xy / m.mu_y**2 + m.var_y * m.mu_x / m.mu_y**3


class MeanEstimateReActBias(NamedTuple):
    approx: float
    exact: float


def re_act_bias_of_mean_estimate(dist: EffortDistribution) -> MeanEstimateReActBias:
    """Expected mean RE_act when every estimate equals the true mean.

    ``approx`` is -Var/mean**2 from the ratio approximation (with the estimate
    a constant, so the covariance term vanishes); ``exact`` is
    1 - mean * E[1/X]. Both are negative: perfect mean estimates look like
    over-estimates under this measure.
    """
    mean = dist.mean()
    approx = 1.0 - ratio_expectation_approx(RatioMoments(mu_x=mean, mu_y=mean, var_y=dist.variance()))
    exact = 1.0 - mean * dist.reciprocal_mean()
    return MeanEstimateReActBias(approx=approx, exact=exact)


def analytic_expected_bias(dist: EffortDistribution, estimate: float, measure: BiasMeasure) -> float:
    """Expected bias from distribution statistics alone.

    Mean-aggregated measures are linear in E[X] or E[1/X]. For median-aggregated
    measures the per-record score is increasing in the actual effort, so the
    median score is the score of the median effort (exact for continuous
    distributions and for discrete ones whose median is an atom).
    """
    measure = BiasMeasure(measure)
    e = float(estimate)
    if measure is BiasMeasure.MEAN_DEV:
        return dist.mean() - e
    if measure is BiasMeasure.MEAN_RE_EST:
        return dist.mean() / e - 1.0
    if measure is BiasMeasure.MEAN_RE_ACT:
        return 1.0 - e * dist.reciprocal_mean()
    return float(scores(e, dist.median(), measure.per_record_form))


def functional_value(dist: EffortDistribution, functional: Functional) -> float:
    if functional is Functional.MEAN:
        return dist.mean()
    if functional is Functional.MEDIAN:
        return dist.median()
    return dist.harmonic_point()


def bisect_root(
    f: Callable[[float], float], lo: float, hi: float, rtol: float = ROOT_RTOL, max_iter: int = 200
) -> float:
    """Bisection for a sign change of ``f`` on ``[lo, hi]``, relative x-tolerance."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise RootFindingError("bias does not change sign", (lo, hi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0 or (hi - lo) <= rtol * abs(mid):
            return mid
        if flo * fmid < 0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def _curve_function(dist, measure, cfg) -> tuple[Callable[[float], float], str]:
    measure = BiasMeasure(measure)
    if isinstance(dist, DiscreteEffort):
        return (lambda e: exact_expected_bias(dist, e, measure)), "exact"
    actuals = draw_actuals(dist, cfg)

    def f(e: float) -> float:
        return aggregate(scores(e, actuals, measure.per_record_form), measure.aggregation)

    return f, "simulated"


def _bracket_from(f, start: float, max_steps: int = 64) -> tuple[float, float]:
    # every measure is non-increasing in the estimate, so walk downhill/uphill
    f0 = f(start)
    if f0 == 0:
        return start, start
    step = 2.0 if f0 > 0 else 0.5
    prev, e = start, start
    for _ in range(max_steps):
        prev, e = e, e * step
        fe = f(e)
        if fe == 0 or (fe > 0) != (f0 > 0):
            return (prev, e) if prev < e else (e, prev)
    raise RootFindingError("no zero-bias estimate found", (min(start, e), max(start, e)))


def zero_bias_estimate(
    dist: EffortDistribution,
    measure: BiasMeasure,
    method: str = "analytic",
    cfg: SimulationConfig = SimulationConfig(),
) -> float:
    """Estimate whose expected bias is zero under ``measure``.

    With ``method="analytic"`` the answer is the matching functional (mean,
    median, or 1/E[1/X]); distributions that cannot provide it fall back to
    root-finding. ``method="rootfind"`` always bisects the bias curve, found
    by a geometric scan starting at the median.
    """
    measure = BiasMeasure(measure)
    if method not in ("analytic", "rootfind"):
        raise DomainError(f"unknown method {method!r}")
    if method == "analytic":
        try:
            return functional_value(dist, measure.unbiased_for)
        except NotImplementedError:
            pass
    f, _ = _curve_function(dist, measure, cfg)
    lo, hi = _bracket_from(f, dist.median())
    if lo == hi:
        return lo
    return bisect_root(f, lo, hi)


@dataclass(frozen=True)
class ElicitationResult:
    measure: BiasMeasure
    optimal_estimate: float
    min_abs_bias: float
    matched_functional: Functional | None
    method: Method
    grid_optimum: float | None = None
    evaluation: str = "analytic"

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.value,
            "optimal_estimate": self.optimal_estimate,
            "min_abs_bias": self.min_abs_bias,
            "matched_functional": self.matched_functional.value if self.matched_functional else None,
            "method": self.method.value,
            "grid_optimum": self.grid_optimum,
            "evaluation": self.evaluation,
        }


def match_functional(
    dist: EffortDistribution, estimate: float, rtol: float = MATCH_RTOL
) -> Functional | None:
    """The named functional closest to ``estimate``, if within ``rtol`` relative."""
    best, best_gap = None, math.inf
    for fn in Functional:
        target = functional_value(dist, fn)
        gap = abs(estimate - target) / abs(target)
        if gap <= rtol and gap < best_gap:
            best, best_gap = fn, gap
    return best


def solve(dist: EffortDistribution, measure: BiasMeasure, match_rtol: float = MATCH_RTOL) -> ElicitationResult:
    """Analytic zero-bias estimate wrapped as an elicitation result."""
    measure = BiasMeasure(measure)
    est = zero_bias_estimate(dist, measure)
    return ElicitationResult(
        measure=measure,
        optimal_estimate=est,
        min_abs_bias=abs(analytic_expected_bias(dist, est, measure)),
        matched_functional=match_functional(dist, est, match_rtol),
        method=Method.EXACT,
    )


def elicitation_scan(
    dist: EffortDistribution,
    measure: BiasMeasure,
    grid: Sequence[float],
    cfg: SimulationConfig = SimulationConfig(),
    match_rtol: float = MATCH_RTOL,
) -> ElicitationResult:
    """Find the grid estimate with the smallest |expected bias|.

    Discrete distributions are evaluated by exact enumeration, others on one
    shared set of simulated draws. When the curve changes sign next to the
    best grid point the crossing is refined by bisection, and
    ``optimal_estimate`` is the refined value; ``grid_optimum`` always holds
    the raw grid winner.
    """
    measure = BiasMeasure(measure)
    grid = _check_grid(grid)
    f, evaluation = _curve_function(dist, measure, cfg)
    values = np.array([f(e) for e in grid])
    i = int(np.argmin(np.abs(values)))
    best, method = grid[i], Method.GRID_SCAN
    if values[i] != 0:
        for j in (i - 1, i + 1):
            if 0 <= j < len(grid) and values[j] * values[i] < 0:
                lo, hi = sorted((grid[i], grid[j]))
                best, method = bisect_root(f, lo, hi, rtol=1e-12), Method.ROOT_FIND
                break
    return ElicitationResult(
        measure=measure,
        optimal_estimate=best,
        min_abs_bias=abs(f(best)),
        matched_functional=match_functional(dist, best, match_rtol),
        method=method,
        grid_optimum=grid[i],
        evaluation=evaluation,
    )


@dataclass(frozen=True)
class PertInputs:
    min_effort: float
    most_likely: float
    max_effort: float

    def __post_init__(self):
        if not self.min_effort > 0:
            raise DomainError(f"efforts must be positive, got min_effort={self.min_effort}")
        if not self.min_effort <= self.most_likely <= self.max_effort:
            raise DomainError(
                "PERT inputs must satisfy min <= most likely <= max, got "
                f"({self.min_effort}, {self.most_likely}, {self.max_effort})"
            )


def pert_mean(p: PertInputs) -> float:
    """(min + 4 * most likely + max) / 6."""
    return (p.min_effort + 4 * p.most_likely + p.max_effort) / 6
