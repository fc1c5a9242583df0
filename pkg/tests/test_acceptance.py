"""Acceptance criteria; each test prints one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import json
import math
import time

import numpy as np
import pytest

from estbias import cli
from estbias.analysis import elicitation_scan, re_act_bias_of_mean_estimate, zero_bias_estimate
from estbias.calibration import invert_cdf, percentile_hit_rate
from estbias.distributions import DiceProduct, parse_dist_spec
from estbias.measures import (
    ALL_MEASURES,
    Aggregation,
    BiasMeasure,
    EstimationRecord,
    RecordForm,
    compute_bias,
    per_record_score,
)
from estbias.simulation import (
    DEFAULT_SEED,
    SimulationConfig,
    draw_actuals,
    exact_expected_bias,
    reference_scenario,
    simulate_expected_bias,
)

REF = "lognormal:mean=236,sd=126"
SEED = DEFAULT_SEED


def report(number, title, checks):
    ok = all(passed for _, passed in checks)
    lines = [f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"]
    lines += [f"    {'ok ' if passed else 'BAD'} {desc}" for desc, passed in checks]
    print("\n" + "\n".join(lines))
    return ok


@pytest.fixture
def show(capsys):
    def _show(number, title, checks):
        with capsys.disabled():
            ok = report(number, title, checks)
        failed = [d for d, p in checks if not p]
        assert ok, f"criterion {number} failed: {failed}"

    return _show


def scenario_checks():
    cfg = SimulationConfig(n_draws=10_000, seed=SEED)
    t0 = time.perf_counter()
    rows = {r.label: r for r in reference_scenario(cfg)}
    elapsed = time.perf_counter() - t0
    checks = []
    for label, target in (("mode", 0.118), ("median", -0.134), ("mean", -0.285)):
        got = rows[label].expected_re_act
        checks.append((f"{label} est={rows[label].estimate:.1f}: RE_act {got:+.4f} vs {target:+.3f} +/- 0.02", abs(got - target) <= 0.02))
    checks.append((f"runtime {elapsed * 1e3:.1f} ms < 1000 ms", elapsed < 1.0))
    return checks


def test_criterion_1_reference_scenario(show):
    show(1, "reference-scenario reproduction (n=10,000, fixed seed)", scenario_checks())


def test_criterion_2_zero_bias_point(show, capsys):
    code = cli.main(["solve", "--dist", REF, "--measures", "MeanReAct"])
    out = capsys.readouterr().out
    est = json.loads(out)["payload"]["results"][0]["optimal_estimate"]
    dist = parse_dist_spec(REF)
    pt = simulate_expected_bias(dist, est, BiasMeasure.MEAN_RE_ACT, SimulationConfig(n_draws=10_000, seed=SEED))
    show(2, "zero-bias point of mean RE_act", [
        (f"solve exit code {code} == 0", code == 0),
        (f"harmonic point {est:.4f} == 183.7 +/- 0.1", abs(est - 183.7) <= 0.1),
        (f"simulated RE_act at that estimate {pt.expected_bias:+.4f} == 0 +/- 0.02", abs(pt.expected_bias) <= 0.02),
    ])


def test_criterion_3_variance_formula(show):
    approx, exact = re_act_bias_of_mean_estimate(parse_dist_spec(REF))
    # stated to four decimals; one unit in the last place
    show(3, "Var/mean^2 bias of perfect mean estimates", [
        (f"approx {approx:.6f} == -0.2851 +/- 1e-4", abs(approx - -0.2851) <= 1e-4),
        (f"exact {exact:.6f} == -0.2850 +/- 1e-4", abs(exact - -0.2850) <= 1e-4),
        (f"|approx - exact| = {abs(approx - exact):.2e} <= 0.001", abs(approx - exact) <= 0.001),
    ])


def test_criterion_4_dice(show):
    t0 = time.perf_counter()
    d = DiceProduct()
    mean, median, mode = d.mean(), d.median(), d.mode()
    dev = exact_expected_bias(d, 12.25, BiasMeasure.MEAN_DEV)
    re_est = exact_expected_bias(d, 12.25, BiasMeasure.MEAN_RE_EST)
    res = elicitation_scan(d, BiasMeasure.MEAN_RE_ACT, list(range(1, 37)))
    optimum = zero_bias_estimate(d, BiasMeasure.MEAN_RE_ACT)
    elapsed = time.perf_counter() - t0
    show(4, "two-dice example by exact enumeration", [
        (f"mean {mean} == 12.25", mean == 12.25),
        (f"median {median} == 10", median == 10),
        (f"mode {mode} == 6", mode == 6),
        (f"MeanDev at 12.25 is {dev} (exactly 0)", dev == 0.0),
        (f"MeanReEst at 12.25 is {re_est} (exactly 0)", re_est == 0.0),
        (f"integer-grid MeanReAct optimum {res.grid_optimum} == 6", res.grid_optimum == 6),
        (f"continuous optimum {optimum!r} == 14400/2401 within 1e-9", abs(optimum - 14400 / 2401) <= 1e-9),
        (f"refined scan optimum {res.optimal_estimate!r} == 14400/2401 within 1e-9", abs(res.optimal_estimate - 14400 / 2401) <= 1e-9),
        (f"runtime {elapsed * 1e3:.1f} ms < 100 ms", elapsed < 0.1),
    ])


def _datasets(rng, count=50):
    for _ in range(count):
        n = int(rng.integers(1, 100)) * 2 + 1
        actual = rng.lognormal(rng.uniform(2, 7), rng.uniform(0.1, 1.5), n)
        yield n, actual


def test_criterion_5_proper_measure_properties(show):
    rng = np.random.default_rng(20211)
    mean_ok = median_ok = range_ok = swap_ok = True
    worst_mean = 0.0
    for n, actual in _datasets(rng):
        # (a) floats cannot hold the exact sample mean, so zero is up to round-off
        m = math.fsum(actual.tolist()) / n
        recs = [EstimationRecord(str(i), m, float(a)) for i, a in enumerate(actual)]
        dev = compute_bias(recs, BiasMeasure.MEAN_DEV)
        re_est = compute_bias(recs, BiasMeasure.MEAN_RE_EST)
        worst_mean = max(worst_mean, abs(dev) / actual.max(), abs(re_est))
        mean_ok &= abs(dev) <= 1e-12 * actual.max() and abs(re_est) <= 1e-12 * actual.max() / m
        # (b)
        med = float(np.median(actual))
        recs = [EstimationRecord(str(i), med, float(a)) for i, a in enumerate(actual)]
        median_ok &= all(compute_bias(recs, mm) == 0.0 for mm in ALL_MEASURES if mm.aggregation is Aggregation.MEDIAN)
        # (c), (d) with independent random estimates
        est = actual * rng.lognormal(0, 1, n)
        recs = [EstimationRecord(str(i), float(e), float(a)) for i, (e, a) in enumerate(zip(est, actual))]
        swapped = [EstimationRecord(r.id, r.actual, r.estimated) for r in recs]
        range_ok &= all(per_record_score(r, RecordForm.REL_TO_ACTUAL) < 1 and per_record_score(r, RecordForm.REL_TO_ESTIMATE) > -1 for r in recs)
        swap_ok &= compute_bias(swapped, BiasMeasure.MD_LOG_ERR) == -compute_bias(recs, BiasMeasure.MD_LOG_ERR)
    show(5, "proper-measure properties on 50 random datasets", [
        (f"(a) MeanDev, MeanReEst zero at the sample mean (worst relative {worst_mean:.1e} <= 1e-12)", mean_ok),
        ("(b) all four median measures exactly zero at the sample median", median_ok),
        ("(c) RelToActual < 1 and RelToEstimate > -1", range_ok),
        ("(d) MdLogErr negates exactly under estimate/actual swap", swap_ok),
    ])


def test_criterion_6_calibration_cross_check(show):
    dist = parse_dist_spec(REF)
    n = 100_000
    actual = draw_actuals(dist, SimulationConfig(n_draws=n, seed=SEED))
    checks = []
    for p in (0.25, 0.45, 0.5, 0.9):
        q = invert_cdf(dist, p)
        rep = percentile_hit_rate([EstimationRecord(str(i), q, float(a)) for i, a in enumerate(actual)], p)
        band = 4 * math.sqrt(p * (1 - p) / n)
        checks.append((f"p={p}: q={q:.2f}, hit rate {rep.hit_rate:.4f}, |dev| {abs(rep.hit_rate - p):.4f} <= {band:.4f}", abs(rep.hit_rate - p) <= band))
    show(6, "percentile hit-rate cross-check (n=100,000)", checks)


def _scenario_json(chunk_size, workers):
    cfg = SimulationConfig(n_draws=10_000, seed=SEED, chunk_size=chunk_size, workers=workers)
    rows = [r.to_dict() for r in reference_scenario(cfg)]
    env = cli.envelope("reference_scenario", cli._digest(REF), {"dist": REF, "n": cfg.n_draws, "seed": cfg.seed}, {"rows": rows})
    return cli.to_json(env).encode()


def test_criterion_7_determinism(show, capsys):
    a = _scenario_json(4096, 1)
    b = _scenario_json(4096, 1)
    c = _scenario_json(1000, 4)
    d = _scenario_json(333, 8)
    outs = []
    for workers in ("1", "6"):
        for est in ("mode", "median", "mean"):
            cli.main(["simulate", "--dist", REF, "--estimate", est, "--n", "10000", "--seed", str(SEED), "--workers", workers])
            outs.append(capsys.readouterr().out.encode())
    show(7, "byte-identical JSON for identical seeds", [
        ("library rows: repeated run identical", a == b),
        ("library rows: chunk 1000 x 4 threads identical", a == c),
        ("library rows: chunk 333 x 8 threads identical", a == d),
        ("CLI simulate: 1 vs 6 worker threads identical", outs[:3] == outs[3:]),
    ])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
