"""Bias measures over datasets of (estimated, actual) effort pairs.

Sign convention everywhere: positive bias means the actual effort exceeded the
estimate (under-estimation / overrun), negative means over-estimation.

Seven measures are provided, built from four per-record forms and two
aggregations:

=============  ===========  ===================================
measure        aggregation  per-record score
=============  ===========  ===================================
MeanDev        mean         act - est
MeanReAct      mean         (act - est) / act
MeanReEst      mean         (act - est) / est
MedianDev      median       act - est
MedianReAct    median       (act - est) / act
MedianReEst    median       (act - est) / est
MdLogErr       median       ln(act) - ln(est)
=============  ===========  ===================================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class EstimateType(str, enum.Enum):
    MEAN = "Mean"
    MEDIAN = "Median"
    MODE = "Mode"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, text: str | None) -> "EstimateType":
        if text is None or not text.strip():
            return cls.UNKNOWN
        key = text.strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise DomainError(f"unknown estimate type {text!r}")


class Aggregation(str, enum.Enum):
    MEAN = "Mean"
    MEDIAN = "Median"


class RecordForm(str, enum.Enum):
    DEVIATION = "Deviation"
    REL_TO_ACTUAL = "RelToActual"
    REL_TO_ESTIMATE = "RelToEstimate"
    LOG_RATIO = "LogRatio"


class Functional(str, enum.Enum):
    """Summary statistic of the effort distribution a measure is unbiased for."""

    MEAN = "Mean"
    MEDIAN = "Median"
    HARMONIC_POINT = "HarmonicPoint"


class BiasMeasure(str, enum.Enum):
    MEAN_DEV = "MeanDev"
    MEAN_RE_ACT = "MeanReAct"
    MEAN_RE_EST = "MeanReEst"
    MEDIAN_DEV = "MedianDev"
    MEDIAN_RE_ACT = "MedianReAct"
    MEDIAN_RE_EST = "MedianReEst"
    MD_LOG_ERR = "MdLogErr"

    @property
    def aggregation(self) -> Aggregation:
        return _LAYOUT[self][0]

    @property
    def per_record_form(self) -> RecordForm:
        return _LAYOUT[self][1]

    @property
    def unbiased_for(self) -> Functional:
        """The functional whose perfect estimates give zero expected bias."""
        return MATCH_TABLE[self]

    @classmethod
    def parse(cls, text: str) -> "BiasMeasure":
        key = text.strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value.lower() == key:
                return member
        names = ", ".join(m.value for m in cls)
        raise DomainError(f"unknown measure {text!r} (expected one of {names})")


_LAYOUT = {
    BiasMeasure.MEAN_DEV: (Aggregation.MEAN, RecordForm.DEVIATION),
    BiasMeasure.MEAN_RE_ACT: (Aggregation.MEAN, RecordForm.REL_TO_ACTUAL),
    BiasMeasure.MEAN_RE_EST: (Aggregation.MEAN, RecordForm.REL_TO_ESTIMATE),
    BiasMeasure.MEDIAN_DEV: (Aggregation.MEDIAN, RecordForm.DEVIATION),
    BiasMeasure.MEDIAN_RE_ACT: (Aggregation.MEDIAN, RecordForm.REL_TO_ACTUAL),
    BiasMeasure.MEDIAN_RE_EST: (Aggregation.MEDIAN, RecordForm.REL_TO_ESTIMATE),
    BiasMeasure.MD_LOG_ERR: (Aggregation.MEDIAN, RecordForm.LOG_RATIO),
}

MATCH_TABLE: Mapping[BiasMeasure, Functional] = {
    BiasMeasure.MEAN_DEV: Functional.MEAN,
    BiasMeasure.MEAN_RE_EST: Functional.MEAN,
    BiasMeasure.MEAN_RE_ACT: Functional.HARMONIC_POINT,
    BiasMeasure.MEDIAN_DEV: Functional.MEDIAN,
    BiasMeasure.MEDIAN_RE_ACT: Functional.MEDIAN,
    BiasMeasure.MEDIAN_RE_EST: Functional.MEDIAN,
    BiasMeasure.MD_LOG_ERR: Functional.MEDIAN,
}

ALL_MEASURES: tuple[BiasMeasure, ...] = tuple(BiasMeasure)


@dataclass(frozen=True)
class EstimationRecord:
    """One observed (estimated, actual) pair, both in work-hours."""

    id: str
    estimated: float
    actual: float
    estimate_type: EstimateType = EstimateType.UNKNOWN

    def validate(self) -> None:
        for name in ("estimated", "actual"):
            value = getattr(self, name)
            try:
                ok = math.isfinite(value) and value > 0
            except TypeError:
                ok = False
            if not ok:
                raise DomainError(
                    f"record {self.id!r}: {name} effort must be a finite positive number, got {value!r}"
                )


def _score_arrays(est: np.ndarray, act: np.ndarray, form: RecordForm) -> np.ndarray:
    if form is RecordForm.DEVIATION:
        return act - est
    if form is RecordForm.REL_TO_ACTUAL:
        return (act - est) / act
    if form is RecordForm.REL_TO_ESTIMATE:
        return (act - est) / est
    # difference of logs rather than log of the ratio: negates exactly under swap
    return np.log(act) - np.log(est)


def per_record_score(r: EstimationRecord, form: RecordForm) -> float:
    r.validate()
    out = _score_arrays(np.float64(r.estimated), np.float64(r.actual), RecordForm(form))
    return float(out)


def scores(estimated, actual, form: RecordForm) -> np.ndarray:
    """Vectorised per-record scores; inputs broadcast against each other.

    No validation is done here, callers guarantee positivity.
    """
    est = np.asarray(estimated, dtype=np.float64)
    act = np.asarray(actual, dtype=np.float64)
    return _score_arrays(est, act, RecordForm(form))


def aggregate(values: np.ndarray, how: Aggregation) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise DomainError("cannot aggregate an empty collection")
    if how is Aggregation.MEAN:
        return math.fsum(values.tolist()) / values.size
    # even N -> midpoint of the two central order statistics
    return float(np.median(values))


def bias_of_arrays(estimated, actual, measure: BiasMeasure) -> float:
    """compute_bias on raw arrays, used by the simulation engine."""
    measure = BiasMeasure(measure)
    s = scores(estimated, actual, measure.per_record_form)
    return aggregate(s, measure.aggregation)


def _unpack(records: Iterable[EstimationRecord]) -> tuple[np.ndarray, np.ndarray]:
    records = list(records)
    if not records:
        raise DomainError("no estimation records given")
    for r in records:
        r.validate()
    est = np.fromiter((r.estimated for r in records), dtype=np.float64, count=len(records))
    act = np.fromiter((r.actual for r in records), dtype=np.float64, count=len(records))
    return est, act


def compute_bias(records: Sequence[EstimationRecord], measure: BiasMeasure) -> float:
    """Bias of a dataset under one measure.

    Args:
        records: non-empty collection of valid records.
        measure: which of the seven measures to apply.

    Raises:
        DomainError: on an empty collection or any invalid record.
    """
    est, act = _unpack(records)
    return bias_of_arrays(est, act, measure)


@dataclass(frozen=True)
class BiasReport:
    n: int
    values: dict[BiasMeasure, float]
    match_notes: dict[BiasMeasure, Functional] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "values": {m.value: v for m, v in self.values.items()},
            "match_notes": {m.value: f.value for m, f in self.match_notes.items()},
        }


def bias_suite(
    records: Sequence[EstimationRecord], measures: Iterable[BiasMeasure] = ALL_MEASURES
) -> BiasReport:
    wanted = [BiasMeasure(m) for m in measures]
    if not wanted:
        raise DomainError("at least one measure must be requested")
    # canonical order keeps output deterministic regardless of how the set was built
    wanted = [m for m in ALL_MEASURES if m in set(wanted)]
    est, act = _unpack(records)
    values = {m: bias_of_arrays(est, act, m) for m in wanted}
    notes = {m: MATCH_TABLE[m] for m in wanted}
    return BiasReport(n=int(est.size), values=values, match_notes=notes)


_RIGHT_SKEW = "for right-skewed effort"


def mismatch_warning(estimate_type: EstimateType, measure: BiasMeasure) -> str | None:
    """Advisory text when ``measure`` is not proper for ``estimate_type``.

    Returns None when the measure matches, or when the type is unknown. Stated
    directions assume right-skewed effort distributions (mode < median < mean).
    """
    measure = BiasMeasure(measure)
    head = f"{measure.value} on {estimate_type.value}-type estimates"
    if estimate_type is EstimateType.MODE:
        return (
            f"{head}: no practical bias measure exists for most-likely (mode) estimates; "
            "use percentile calibration instead. Perfect mode estimates typically show "
            f"positive bias (apparent under-estimation) {_RIGHT_SKEW}"
        )
    target = MATCH_TABLE[measure]
    if estimate_type is EstimateType.MEAN and target is not Functional.MEAN:
        if measure is BiasMeasure.MEAN_RE_ACT:
            return (
                f"{head}: measure rewards under-estimates of the mean; perfect mean "
                "estimates show negative bias (apparent over-estimation) of about -Var/mean^2"
            )
        return (
            f"{head}: measure is unbiased for the median, not the mean; perfect mean "
            f"estimates show negative bias (apparent over-estimation) {_RIGHT_SKEW}"
        )
    if estimate_type is EstimateType.MEDIAN and target is not Functional.MEDIAN:
        if measure is BiasMeasure.MEAN_RE_ACT:
            return (
                f"{head}: measure is unbiased for the harmonic point 1/E[1/actual], which lies "
                "below the median; perfect median estimates show negative bias (apparent "
                "over-estimation)"
            )
        return (
            f"{head}: measure is unbiased for the mean, not the median; perfect median "
            f"estimates show positive bias (apparent under-estimation) {_RIGHT_SKEW}"
        )
    return None
