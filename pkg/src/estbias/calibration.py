"""Percentile calibration of estimates via hit rates.

Mode estimates have no practical bias measure; the usable surrogate is to
assume each estimate sits at some percentile of its effort distribution and
check how often the actual effort stays at or below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .distributions import EffortDistribution
from .measures import DomainError, EstimationRecord

Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class HitRateReport:
    n: int
    hits: int
    hit_rate: float
    target_percentile: float | None = None
    deviation: float | None = None
    binomial_se: float | None = None
    binomial_band: float | None = None

    @property
    def within_band(self) -> bool | None:
        if self.binomial_band is None:
            return None
        return abs(self.deviation) <= self.binomial_band

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "hits": self.hits,
            "hit_rate": self.hit_rate,
            "target_percentile": self.target_percentile,
            "deviation": self.deviation,
            "binomial_se": self.binomial_se,
            "binomial_band": self.binomial_band,
            "within_band": self.within_band,
        }


def percentile_hit_rate(
    records: Sequence[EstimationRecord], target_percentile: float | None = None
) -> HitRateReport:
    """Share of records whose actual effort is at or below the estimate.

    Ties count as hits. With a target percentile p the report also carries the
    deviation from p and the 95% binomial band 1.96 * sqrt(p(1-p)/n).
    """
    records = list(records)
    if not records:
        raise DomainError("no estimation records given")
    if target_percentile is not None and not 0 < target_percentile < 1:
        raise DomainError(f"target percentile must lie in (0, 1), got {target_percentile!r}")
    for r in records:
        r.validate()
    n = len(records)
    hits = sum(1 for r in records if r.actual <= r.estimated)
    rate = hits / n
    if target_percentile is None:
        return HitRateReport(n=n, hits=hits, hit_rate=rate)
    p = float(target_percentile)
    se = math.sqrt(p * (1 - p) / n)
    return HitRateReport(
        n=n,
        hits=hits,
        hit_rate=rate,
        target_percentile=p,
        deviation=rate - p,
        binomial_se=se,
        binomial_band=Z95 * se,
    )


def invert_cdf(dist: EffortDistribution, p: float, rtol: float = 1e-9) -> float:
    """Numeric quantile: smallest x with cdf(x) >= p, by bisection in x."""
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    lo = hi = dist.median()
    while dist.cdf(lo) >= p:
        lo /= 2
    while dist.cdf(hi) < p:
        hi *= 2
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if dist.cdf(mid) >= p:
            hi = mid
        else:
            lo = mid
    return hi
