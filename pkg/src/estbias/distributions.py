"""Effort distributions with closed-form statistics.

Three families are provided: a parametric log-normal, the exact distribution of
the product of two fair dice, and an empirical distribution over observed
efforts. All of them are immutable; sampling takes the generator explicitly.
"""

from __future__ import annotations

import abc
import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .measures import DomainError


class EffortDistribution(abc.ABC):
    """Probability model of effort usage on a strictly positive support."""

    name: str = "distribution"

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...

    @abc.abstractmethod
    def mean(self) -> float: ...

    @abc.abstractmethod
    def median(self) -> float: ...

    @abc.abstractmethod
    def mode(self) -> float: ...

    @abc.abstractmethod
    def variance(self) -> float: ...

    @abc.abstractmethod
    def reciprocal_mean(self) -> float:
        """E[1/X]."""

    @abc.abstractmethod
    def cdf(self, x: float) -> float: ...

    def harmonic_point(self) -> float:
        """1 / E[1/X]; the estimate with zero expected mean RE_act."""
        return 1.0 / self.reciprocal_mean()

    def sd(self) -> float:
        return math.sqrt(self.variance())

    def describe(self) -> dict:
        return {
            "family": self.name,
            "mean": self.mean(),
            "median": self.median(),
            "mode": self.mode(),
            "harmonic_point": self.harmonic_point(),
            "sd": self.sd(),
        }


@dataclass(frozen=True)
class LogNormalEffort(EffortDistribution):
    """Log-normal effort: ln X ~ Normal(mu_log, sigma_log**2)."""

    mu_log: float
    sigma_log: float
    name = "lognormal"

    def __post_init__(self):
        if not math.isfinite(self.mu_log):
            raise DomainError(f"mu_log must be finite, got {self.mu_log!r}")
        if not (math.isfinite(self.sigma_log) and self.sigma_log > 0):
            raise DomainError(f"sigma_log must be positive, got {self.sigma_log!r}")

    @property
    def _s2(self) -> float:
        return self.sigma_log**2

    def sample(self, rng, size):
        z = rng.standard_normal(size)
        return np.exp(self.mu_log + self.sigma_log * z)

    def mean(self):
        return math.exp(self.mu_log + self._s2 / 2)

    def median(self):
        return math.exp(self.mu_log)

    def mode(self):
        return math.exp(self.mu_log - self._s2)

    def variance(self):
        return math.expm1(self._s2) * math.exp(2 * self.mu_log + self._s2)

    def reciprocal_mean(self):
        return math.exp(-self.mu_log + self._s2 / 2)

    def harmonic_point(self):
        return math.exp(self.mu_log - self._s2 / 2)

    def cdf(self, x):
        if x <= 0:
            return 0.0
        z = (math.log(x) - self.mu_log) / self.sigma_log
        return 0.5 * math.erfc(-z / math.sqrt(2))

    def quantile(self, p: float) -> float:
        if not 0 < p < 1:
            raise DomainError(f"quantile level must lie in (0, 1), got {p!r}")
        return math.exp(self.mu_log + self.sigma_log * NormalDist().inv_cdf(p))

    def describe(self):
        out = super().describe()
        out.update(mu_log=self.mu_log, sigma_log=self.sigma_log)
        return out


def lognormal_from_mean_sd(mean: float, sd: float) -> LogNormalEffort:
    """Log-normal with the given arithmetic mean and standard deviation."""
    if not (mean > 0 and sd > 0):
        raise DomainError(f"mean and sd must be positive, got mean={mean!r}, sd={sd!r}")
    s2 = math.log1p((sd / mean) ** 2)
    return LogNormalEffort(mu_log=math.log(mean) - s2 / 2, sigma_log=math.sqrt(s2))


def lognormal_from_mean_median(mean: float, median: float) -> LogNormalEffort:
    if not median > 0:
        raise DomainError(f"median must be positive, got {median!r}")
    if not mean > median:
        raise DomainError(
            f"a log-normal needs mean > median, got mean={mean!r}, median={median!r}"
        )
    s2 = 2 * math.log(mean / median)
    return LogNormalEffort(mu_log=math.log(median), sigma_log=math.sqrt(s2))


def weighted_median(values: Sequence[float], weights: Sequence[Fraction]):
    """Median of a discrete distribution.

    Uses the same convention as the sample median of an even-sized dataset:
    when the cumulative weight hits exactly one half at some atom, the result
    is the midpoint between that atom and the next one.
    """
    pairs = sorted(zip(values, weights), key=lambda vw: vw[0])
    half = sum(weights, Fraction(0)) / 2
    cum = Fraction(0)
    for i, (v, w) in enumerate(pairs):
        cum += w
        if cum == half and i + 1 < len(pairs):
            return (v + pairs[i + 1][0]) / 2
        if cum >= half:
            return v
    return pairs[-1][0]


class DiscreteEffort(EffortDistribution):
    """A distribution with finitely many atoms, allowing exact expectations."""

    @abc.abstractmethod
    def atoms(self) -> list[tuple[float, Fraction]]:
        """Sorted (value, probability) pairs; probabilities sum to one."""


def dice_enumerate() -> list[tuple[int, Fraction]]:
    """Exact distribution of the product of two fair six-sided dice."""
    counts: dict[int, int] = {}
    for a in range(1, 7):
        for b in range(1, 7):
            counts[a * b] = counts.get(a * b, 0) + 1
    return [(v, Fraction(c, 36)) for v, c in sorted(counts.items())]


class DiceProduct(DiscreteEffort):
    """Product of two fair dice: 36 equally likely outcomes on 18 distinct values."""

    name = "dice"

    def __eq__(self, other):
        return isinstance(other, DiceProduct)

    def __hash__(self):
        return hash(DiceProduct)

    def __repr__(self):
        return "DiceProduct()"

    @cached_property
    def _atoms(self):
        return dice_enumerate()

    def atoms(self):
        return list(self._atoms)

    def sample(self, rng, size):
        a = rng.integers(1, 7, size=size)
        b = rng.integers(1, 7, size=size)
        return (a * b).astype(np.float64)

    def exact_mean(self) -> Fraction:
        return sum((v * p for v, p in self._atoms), Fraction(0))

    def exact_variance(self) -> Fraction:
        m = self.exact_mean()
        return sum((p * (v - m) ** 2 for v, p in self._atoms), Fraction(0))

    def exact_reciprocal_mean(self) -> Fraction:
        return sum((p / v for v, p in self._atoms), Fraction(0))

    def exact_median(self) -> Fraction:
        return Fraction(weighted_median([Fraction(v) for v, _ in self._atoms], [p for _, p in self._atoms]))

    def mean(self):
        return float(self.exact_mean())

    def median(self):
        return float(self.exact_median())

    def mode(self):
        # 6 and 12 tie at 4/36; the lower value wins
        top = max(p for _, p in self._atoms)
        return float(min(v for v, p in self._atoms if p == top))

    def variance(self):
        return float(self.exact_variance())

    def reciprocal_mean(self):
        return float(self.exact_reciprocal_mean())

    def harmonic_point(self):
        return float(1 / self.exact_reciprocal_mean())

    def cdf(self, x):
        return float(sum((p for v, p in self._atoms if v <= x), Fraction(0)))


class Empirical(DiscreteEffort):
    """Uniform distribution over observed efforts (resampling with replacement).

    Statistics are population statistics of the sample (variance uses ddof=0),
    so that they agree with exact enumeration over the atoms.
    """

    name = "empirical"

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=np.float64).ravel()
        if arr.size == 0:
            raise DomainError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(arr) & (arr > 0)):
            raise DomainError("empirical samples must be finite and positive")
        arr = np.sort(arr)
        arr.setflags(write=False)
        self._samples = arr

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    def __repr__(self):
        return f"Empirical(n={self._samples.size})"

    def atoms(self):
        values, counts = np.unique(self._samples, return_counts=True)
        n = self._samples.size
        return [(float(v), Fraction(int(c), n)) for v, c in zip(values, counts)]

    def sample(self, rng, size):
        idx = rng.integers(0, self._samples.size, size=size)
        return self._samples[idx]

    def mean(self):
        return math.fsum(self._samples.tolist()) / self._samples.size

    def median(self):
        return float(np.median(self._samples))

    def mode(self):
        """Midpoint of the densest Freedman-Diaconis histogram bin."""
        x = self._samples
        if x[0] == x[-1]:
            return float(x[0])
        counts, edges = np.histogram(x, bins="fd")
        k = int(np.argmax(counts))
        return float((edges[k] + edges[k + 1]) / 2)

    def variance(self):
        return float(np.var(self._samples))

    def reciprocal_mean(self):
        return math.fsum((1.0 / self._samples).tolist()) / self._samples.size

    def cdf(self, x):
        return float(np.searchsorted(self._samples, x, side="right")) / self._samples.size


def read_effort_column(path: str | Path) -> np.ndarray:
    """Single-column CSV of positive efforts; a non-numeric first row is a header."""
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if lineno == 1:
                    continue
                raise DomainError(f"{path}:{lineno}: not a number: {row[0]!r}") from None
    return np.asarray(values, dtype=np.float64)


def _parse_params(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise DomainError(f"expected key=value, got {part!r}")
        try:
            out[key.strip().lower()] = float(value)
        except ValueError:
            raise DomainError(f"parameter {key.strip()!r} is not a number: {value!r}") from None
    return out


def parse_dist_spec(spec: str) -> EffortDistribution:
    """Build a distribution from a spec string.

    Accepted forms::

        lognormal:mean=236,sd=126
        lognormal:mean=236,median=209
        lognormal:mu=5.34,sigma=0.5
        dice
        empirical:efforts.csv
    """
    family, _, rest = spec.strip().partition(":")
    family = family.strip().lower()
    if family == "dice" and not rest:
        return DiceProduct()
    if family == "empirical":
        if not rest:
            raise DomainError("empirical spec needs a file path: empirical:<path.csv>")
        return Empirical(read_effort_column(rest))
    if family == "lognormal":
        params = _parse_params(rest)
        keys = set(params)
        if keys == {"mean", "sd"}:
            return lognormal_from_mean_sd(params["mean"], params["sd"])
        if keys == {"mean", "median"}:
            return lognormal_from_mean_median(params["mean"], params["median"])
        if keys == {"mu", "sigma"}:
            return LogNormalEffort(params["mu"], params["sigma"])
        raise DomainError(
            f"lognormal spec needs mean+sd, mean+median or mu+sigma, got {sorted(keys)}"
        )
    raise DomainError(f"unknown distribution spec {spec!r}")
