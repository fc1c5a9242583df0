import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from estbias.distributions import (
    DiceProduct,
    Empirical,
    LogNormalEffort,
    dice_enumerate,
    lognormal_from_mean_median,
    lognormal_from_mean_sd,
    parse_dist_spec,
    weighted_median,
)
from estbias.measures import DomainError

# mpmath: findroot on the moment equations + adaptive quadrature of the density
REF_MU = 5.33843400254534390889
REF_SIGMA = 0.50079497297849578266
REF_MEDIAN = 208.186435454978287881
REF_MODE = 162.006814244403827221
REF_HARMONIC = 183.650813167160342033
REF_RECIP_MEAN = 0.00544511610242527230


@pytest.fixture
def skewed():
    return lognormal_from_mean_sd(236, 126)


def test_from_mean_sd_matches_numeric_inversion(skewed):
    assert skewed.mu_log == pytest.approx(REF_MU, rel=1e-12)
    assert skewed.sigma_log == pytest.approx(REF_SIGMA, rel=1e-12)
    assert skewed.mu_log == pytest.approx(5.33843, abs=1e-5)
    assert skewed.median() == pytest.approx(208.2, abs=0.05)
    assert skewed.mode() == pytest.approx(162.0, abs=0.05)


def test_from_mean_sd_round_trip(skewed):
    assert skewed.mean() == pytest.approx(236, rel=1e-9)
    assert skewed.variance() == pytest.approx(126**2, rel=1e-9)
    assert skewed.sd() == pytest.approx(126, rel=1e-9)


def test_from_mean_sd_degenerate_limit():
    d = lognormal_from_mean_sd(300, 300e-6)
    assert d.sigma_log == pytest.approx(1e-6, rel=1e-6)
    assert d.median() == pytest.approx(300, rel=1e-9)


@pytest.mark.parametrize("mean,sd", [(0, 1), (-1, 1), (10, 0), (10, -2)])
def test_from_mean_sd_rejects(mean, sd):
    with pytest.raises(DomainError):
        lognormal_from_mean_sd(mean, sd)


def test_from_mean_median():
    d = lognormal_from_mean_median(236, 209)
    # closed form 2 ln(236/209) evaluated in mpmath
    assert d.sigma_log**2 == pytest.approx(0.242995106121598, rel=1e-12)
    assert d.mode() == pytest.approx(163.913548549267, rel=1e-12)
    assert d.mean() == pytest.approx(236, rel=1e-12)
    assert d.median() == pytest.approx(209, rel=1e-12)
    assert lognormal_from_mean_median(236, 236 * (1 - 1e-9)).sigma_log < 1e-4
    with pytest.raises(DomainError):
        lognormal_from_mean_median(200, 300)
    with pytest.raises(DomainError):
        lognormal_from_mean_median(200, 200)


def test_lognormal_statistics_against_quadrature(skewed):
    assert skewed.median() == pytest.approx(REF_MEDIAN, rel=1e-12)
    assert skewed.mode() == pytest.approx(REF_MODE, rel=1e-12)
    assert skewed.harmonic_point() == pytest.approx(REF_HARMONIC, rel=1e-12)
    assert skewed.reciprocal_mean() == pytest.approx(REF_RECIP_MEAN, rel=1e-12)


def test_lognormal_statistics_against_trapezoid():
    d = LogNormalEffort(1.3, 0.8)
    z = np.linspace(-12, 12, 200_001)
    x = np.exp(d.mu_log + d.sigma_log * z)
    w = np.exp(-z**2 / 2) / math.sqrt(2 * math.pi)
    assert np.trapezoid(x * w, z) == pytest.approx(d.mean(), rel=1e-9)
    assert np.trapezoid(w / x, z) == pytest.approx(d.reciprocal_mean(), rel=1e-9)
    assert np.trapezoid((x - d.mean()) ** 2 * w, z) == pytest.approx(d.variance(), rel=1e-8)


@given(st.floats(-3, 8), st.floats(1e-3, 2.5))
def test_lognormal_ordering(mu, sigma):
    d = LogNormalEffort(mu, sigma)
    assert d.mode() < d.harmonic_point() < d.median() < d.mean()


@given(st.floats(-3, 8), st.floats(1e-2, 2.5))
def test_lognormal_cdf_at_median(mu, sigma):
    d = LogNormalEffort(mu, sigma)
    assert abs(d.cdf(d.median()) - 0.5) <= 1e-9


def test_lognormal_quantile_inverts_cdf(skewed):
    for p in (0.01, 0.25, 0.45, 0.5, 0.9, 0.999):
        assert skewed.cdf(skewed.quantile(p)) == pytest.approx(p, abs=1e-12)
    assert skewed.cdf(0) == 0.0 and skewed.cdf(-5) == 0.0


def test_lognormal_rejects_bad_sigma():
    for s in (0.0, -1.0, float("nan")):
        with pytest.raises(DomainError):
            LogNormalEffort(1.0, s)


def test_lognormal_sampling_consistency(skewed):
    rng = np.random.Generator(np.random.PCG64(12345))
    n = 1_000_000
    x = skewed.sample(rng, n)
    assert abs(x.mean() - skewed.mean()) < 4 * x.std(ddof=1) / math.sqrt(n)
    inv = 1 / x
    assert abs(inv.mean() - skewed.reciprocal_mean()) < 4 * inv.std(ddof=1) / math.sqrt(n)
    # sample median SE = 1 / (2 f(m) sqrt(n)); lognormal density at the median
    f_med = 1 / (skewed.median() * skewed.sigma_log * math.sqrt(2 * math.pi))
    assert abs(np.median(x) - skewed.median()) < 4 / (2 * f_med * math.sqrt(n))


def brute_dice():
    return [a * b for a, b in itertools.product(range(1, 7), repeat=2)]


def test_dice_enumerate():
    atoms = dice_enumerate()
    assert len(atoms) == 18
    assert sum(p for _, p in atoms) == 1
    assert sum(v * p for v, p in atoms) == Fraction(49, 4)
    outcomes = brute_dice()
    for v, p in atoms:
        assert p == Fraction(outcomes.count(v), 36)
    assert sum(p for v, p in atoms if v <= 10) >= Fraction(1, 2)
    assert sum(p for v, p in atoms if v >= 10) >= Fraction(1, 2)


def test_dice_statistics():
    d = DiceProduct()
    outcomes = brute_dice()
    assert d.mean() == 12.25
    assert d.median() == 10
    assert d.mode() == 6
    assert d.exact_reciprocal_mean() == Fraction(2401, 14400)
    assert d.exact_reciprocal_mean() == sum(Fraction(1, 36 * o) for o in outcomes)
    assert d.exact_variance() == Fraction(11515, 144)
    assert d.harmonic_point() == pytest.approx(14400 / 2401, rel=1e-15)
    assert d.harmonic_point() <= d.mean()


def test_dice_cdf_step():
    d = DiceProduct()
    assert d.cdf(0.5) == 0
    assert d.cdf(1) == pytest.approx(1 / 36)
    assert d.cdf(35.999) == pytest.approx(35 / 36)
    assert d.cdf(36) == 1
    assert d.cdf(10) == d.cdf(10.99) == pytest.approx(19 / 36)


def test_dice_sampling_support():
    x = DiceProduct().sample(np.random.default_rng(3), 10_000)
    assert set(np.unique(x)) <= set(brute_dice())


def test_weighted_median_midpoint_convention():
    assert weighted_median([1, 2, 3, 4], [Fraction(1, 4)] * 4) == 2.5
    assert weighted_median([5, 1, 3], [Fraction(1, 3)] * 3) == 3


def test_empirical_statistics():
    xs = [120.0, 80.0, 200.0, 95.0, 310.0, 150.0]
    d = Empirical(xs)
    assert d.mean() == pytest.approx(np.mean(xs))
    assert d.median() == np.median(xs)
    assert d.variance() == pytest.approx(np.var(xs))
    assert d.reciprocal_mean() == pytest.approx(np.mean(1 / np.array(xs)))
    assert d.harmonic_point() <= d.mean()
    assert d.cdf(120) == pytest.approx(3 / 6)
    assert sum(p for _, p in d.atoms()) == 1
    assert min(xs) <= d.mode() <= max(xs)
    assert Empirical([7.0, 7.0]).mode() == 7.0


def test_empirical_mode_finds_dense_region():
    rng = np.random.default_rng(0)
    xs = np.concatenate([rng.normal(100, 2, 900), rng.uniform(150, 1000, 100)])
    assert Empirical(xs).mode() == pytest.approx(100, abs=5)


def test_empirical_rejects():
    with pytest.raises(DomainError):
        Empirical([])
    with pytest.raises(DomainError):
        Empirical([1.0, 0.0])


def test_parse_dist_spec(tmp_path):
    d = parse_dist_spec("lognormal:mean=236,sd=126")
    assert d == lognormal_from_mean_sd(236, 126)
    assert parse_dist_spec("lognormal:mean=236,median=209") == lognormal_from_mean_median(236, 209)
    assert parse_dist_spec("lognormal:mu=1,sigma=0.5") == LogNormalEffort(1, 0.5)
    assert isinstance(parse_dist_spec("dice"), DiceProduct)
    f = tmp_path / "eff.csv"
    f.write_text("effort\n100\n200\n300\n")
    e = parse_dist_spec(f"empirical:{f}")
    assert e.mean() == 200
    f.write_text("100\n200\n")
    assert parse_dist_spec(f"empirical:{f}").mean() == 150


@pytest.mark.parametrize("spec", ["gamma:a=1", "lognormal:mean=236", "lognormal:mean=x,sd=1", "lognormal:mean=1,sd=2,median=3", "empirical:", "dice:3"])
def test_parse_dist_spec_rejects(spec):
    with pytest.raises(DomainError):
        parse_dist_spec(spec)
