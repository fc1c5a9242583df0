"""``estbias`` command-line front end.

Exit codes: 0 success, 1 computational failure, 2 usage or input error.
Output is JSON (key-sorted, deterministic) by default, or CSV with
``--format csv``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys

import numpy as np

from . import __version__
from .analysis import RootFindingError, elicitation_scan, solve
from .calibration import percentile_hit_rate
from .dataset import load_dataset
from .distributions import DiceProduct, DiscreteEffort, EffortDistribution, parse_dist_spec
from .measures import (
    ALL_MEASURES,
    BiasMeasure,
    DomainError,
    EstimateType,
    bias_suite,
    mismatch_warning,
)
from .simulation import (
    DEFAULT_DRAWS,
    SimulationConfig,
    bias_curve,
    default_seed,
    exact_expected_bias,
    expected_bias,
)

ESTIMATE_LABELS = ("mean", "median", "mode", "harmonic")


def _digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def envelope(command: str, input_digest: str, config: dict, payload, warnings=()) -> dict:
    return {
        "tool": "estbias",
        "version": __version__,
        "command": command,
        "input_digest": input_digest,
        "config": config,
        "payload": payload,
        "warnings": list(warnings),
    }


def to_json(env: dict) -> str:
    return json.dumps(env, sort_keys=True, indent=2, allow_nan=False) + "\n"


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def parse_measures(text: str | None) -> list[BiasMeasure]:
    if text is None or text.strip().lower() == "all":
        return list(ALL_MEASURES)
    out = [BiasMeasure.parse(t) for t in text.split(",") if t.strip()]
    if not out:
        raise DomainError("no measures given")
    return [m for m in ALL_MEASURES if m in out]


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` | ``lo..hi`` (step 1) | ``lo..hi:step`` | ``lo..hi/npoints``."""
    text = text.strip()
    try:
        if ".." not in text:
            return [float(t) for t in text.split(",") if t.strip()]
        lo_s, rest = text.split("..", 1)
        lo = float(lo_s)
        if "/" in rest:
            hi_s, n_s = rest.split("/", 1)
            return np.linspace(lo, float(hi_s), int(n_s)).tolist()
        hi_s, _, step_s = rest.partition(":")
        hi, step = float(hi_s), float(step_s) if step_s else 1.0
    except ValueError:
        raise DomainError(f"cannot parse grid {text!r}") from None
    if step <= 0:
        raise DomainError("grid step must be positive")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def default_grid(dist: EffortDistribution) -> list[float]:
    lo = 0.5 * min(dist.harmonic_point(), dist.median(), dist.mode())
    return np.linspace(lo, 1.5 * dist.mean(), 201).tolist()


def resolve_estimate(dist: EffortDistribution, text: str) -> tuple[str, float]:
    key = text.strip().lower()
    if key == "mean":
        return key, dist.mean()
    if key == "median":
        return key, dist.median()
    if key == "mode":
        return key, dist.mode()
    if key in ("harmonic", "harmonic_point"):
        return "harmonic", dist.harmonic_point()
    try:
        value = float(key)
    except ValueError:
        raise DomainError(
            f"estimate must be a number or one of {', '.join(ESTIMATE_LABELS)}, got {text!r}"
        ) from None
    return "value", value


def _dist_digest(spec: str, dist: EffortDistribution) -> str:
    if hasattr(dist, "samples"):
        return "sha256:" + hashlib.sha256(dist.samples.tobytes()).hexdigest()
    return _digest(spec)


def cmd_evaluate(args) -> tuple[dict, str]:
    ds = load_dataset(args.path, skip_invalid=args.skip_invalid)
    measures = parse_measures(args.measures)
    overall = bias_suite(ds.records, measures)
    warnings = list(ds.warnings)
    by_type = {}
    if ds.has_types:
        for et in EstimateType:
            group = [r for r in ds.records if r.estimate_type is et]
            if not group:
                continue
            by_type[et.value] = bias_suite(group, measures).to_dict()
            for m in measures:
                msg = mismatch_warning(et, m)
                if msg:
                    warnings.append(msg)
    payload = {
        "report": overall.to_dict(),
        "by_estimate_type": by_type,
        "skipped_rows": len(ds.skipped),
        "skipped": [{"line": ln, "reason": why} for ln, why in ds.skipped],
    }
    config = {"measures": [m.value for m in measures], "skip_invalid": args.skip_invalid}
    env = envelope("evaluate", ds.digest, config, payload, warnings)
    rows = [["all", m.value, v, overall.match_notes[m].value, overall.n] for m, v in overall.values.items()]
    for et, rep in by_type.items():
        rows += [[et, m, v, rep["match_notes"][m], rep["n"]] for m, v in rep["values"].items()]
    return env, to_csv(["group", "measure", "value", "unbiased_for", "n"], rows)


def _sim_config(args) -> SimulationConfig:
    return SimulationConfig(n_draws=args.n, seed=args.seed, workers=args.workers)


def cmd_simulate(args) -> tuple[dict, str]:
    dist = parse_dist_spec(args.dist)
    measures = parse_measures(args.measures)
    label, value = resolve_estimate(dist, args.estimate)
    cfg = _sim_config(args)
    results = []
    for m in measures:
        pt, method = expected_bias(dist, value, m, cfg)
        results.append({"measure": m.value, "expected_bias": pt.expected_bias, "std_error": pt.std_error, "method": method})
    payload = {
        "distribution": dist.describe(),
        "estimate": {"label": label, "value": value},
        "results": results,
    }
    config = {"dist": args.dist, "estimate": args.estimate, "measures": [m.value for m in measures], "n": cfg.n_draws, "seed": cfg.seed}
    env = envelope("simulate", _dist_digest(args.dist, dist), config, payload)
    rows = [[r["measure"], label, value, r["expected_bias"], r["std_error"], r["method"]] for r in results]
    return env, to_csv(["measure", "estimate_label", "estimate", "expected_bias", "std_error", "method"], rows)


def cmd_solve(args) -> tuple[dict, str]:
    dist = parse_dist_spec(args.dist)
    measures = parse_measures(args.measures)
    results = [solve(dist, m).to_dict() for m in measures]
    config = {"dist": args.dist, "measures": [m.value for m in measures]}
    env = envelope("solve", _dist_digest(args.dist, dist), config, {"distribution": dist.describe(), "results": results})
    keys = ["measure", "optimal_estimate", "min_abs_bias", "matched_functional", "method"]
    return env, to_csv(keys, [[r[k] for k in keys] for r in results])


def cmd_elicit(args) -> tuple[dict, str]:
    dist = parse_dist_spec(args.dist)
    measures = parse_measures(args.measures)
    grid = parse_grid(args.grid) if args.grid else default_grid(dist)
    cfg = _sim_config(args)
    results, rows = [], []
    for m in measures:
        res = elicitation_scan(dist, m, grid, cfg)
        if isinstance(dist, DiscreteEffort):
            points = [expected_bias(dist, e, m)[0] for e in grid]
            curve = [[p.estimate, p.expected_bias, p.std_error] for p in points]
        else:
            curve = [[p.estimate, p.expected_bias, p.std_error] for p in bias_curve(dist, grid, m, cfg)]
        results.append({"result": res.to_dict(), "curve": [dict(zip(("estimate", "expected_bias", "std_error"), c)) for c in curve]})
        rows += [[m.value, "grid", *c] for c in curve]
        rows.append([m.value, "optimum", res.optimal_estimate, None, None])
    config = {"dist": args.dist, "grid": args.grid, "measures": [m.value for m in measures], "n": cfg.n_draws, "seed": cfg.seed}
    env = envelope("elicit", _dist_digest(args.dist, dist), config, {"distribution": dist.describe(), "results": results})
    return env, to_csv(["measure", "kind", "estimate", "expected_bias", "std_error"], rows)


def cmd_calibrate(args) -> tuple[dict, str]:
    ds = load_dataset(args.path, skip_invalid=args.skip_invalid)
    rep = percentile_hit_rate(ds.records, args.target)
    payload = {"percentile_calibration": rep.to_dict(), "skipped_rows": len(ds.skipped)}
    env = envelope("calibrate", ds.digest, {"target": args.target, "skip_invalid": args.skip_invalid}, payload, ds.warnings)
    d = rep.to_dict()
    return env, to_csv(list(d), [list(d.values())])


def dice_table() -> dict:
    dist = DiceProduct()
    estimates = [("mode", dist.mode()), ("median", dist.median()), ("mean", dist.mean())]
    rows = []
    for label, e in estimates:
        values = {m.value: exact_expected_bias(dist, e, m) for m in ALL_MEASURES}
        rows.append({"label": label, "estimate": e, "expected_bias": values})
    grid_result = elicitation_scan(dist, BiasMeasure.MEAN_RE_ACT, list(range(1, 37)))
    optimum = 1 / dist.exact_reciprocal_mean()
    return {
        "distribution": {
            "outcomes": 36,
            "mean": dist.mean(),
            "median": dist.median(),
            "mode": dist.mode(),
            "variance": dist.variance(),
            "reciprocal_mean": str(dist.exact_reciprocal_mean()),
        },
        "rows": rows,
        "re_act_optimum": {
            "integer_grid": grid_result.grid_optimum,
            "continuous": float(optimum),
            "fraction": str(optimum),
        },
    }


def cmd_dice(args) -> tuple[dict, str]:
    payload = dice_table()
    env = envelope("dice", _digest("dice"), {}, payload)
    header = ["estimate_label", "estimate", *(m.value for m in ALL_MEASURES)]
    rows = [[r["label"], r["estimate"], *r["expected_bias"].values()] for r in payload["rows"]]
    opt = payload["re_act_optimum"]["continuous"]
    rows.append(["re_act_optimum", opt, *(exact_expected_bias(DiceProduct(), opt, m) for m in ALL_MEASURES)])
    return env, to_csv(header, rows)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--n", type=int, default=DEFAULT_DRAWS, help="number of simulated draws")
    sim.add_argument("--seed", type=int, default=None, help="RNG seed (default: $ESTBIAS_SEED or 2021)")
    sim.add_argument("--workers", type=int, default=1, help="simulation threads; never changes results")

    p = _Parser(prog="estbias", description="Bias measures for effort estimates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("evaluate", parents=[common], help="bias report for a dataset CSV")
    ev.add_argument("path")
    ev.add_argument("--measures", default="all", help="comma-separated measure names or 'all'")
    ev.add_argument("--skip-invalid", action="store_true", help="skip and count invalid rows")
    ev.set_defaults(func=cmd_evaluate)

    si = sub.add_parser("simulate", parents=[common, sim], help="expected bias of a fixed estimate")
    si.add_argument("--dist", required=True)
    si.add_argument("--estimate", required=True, help="number or mean|median|mode|harmonic")
    si.add_argument("--measures", "--measure", dest="measures", default="MeanReAct")
    si.set_defaults(func=cmd_simulate)

    so = sub.add_parser("solve", parents=[common], help="zero-bias estimate, analytically")
    so.add_argument("--dist", required=True)
    so.add_argument("--measures", "--measure", dest="measures", default="MeanReAct")
    so.set_defaults(func=cmd_solve)

    el = sub.add_parser("elicit", parents=[common, sim], help="scan a grid for the bias-minimising estimate")
    el.add_argument("--dist", required=True)
    el.add_argument("--measures", "--measure", dest="measures", default="MeanReAct")
    el.add_argument("--grid", default=None, help="a,b,c | lo..hi | lo..hi:step | lo..hi/npoints")
    el.set_defaults(func=cmd_elicit)

    ca = sub.add_parser("calibrate", parents=[common], help="percentile hit rate of a dataset")
    ca.add_argument("path")
    ca.add_argument("--target", type=float, default=None, help="assumed percentile of the estimates, in (0, 1)")
    ca.add_argument("--skip-invalid", action="store_true")
    ca.set_defaults(func=cmd_calibrate)

    di = sub.add_parser("dice", parents=[common], help="the two-dice worked example")
    di.set_defaults(func=cmd_dice)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        try:
            args.seed = default_seed()
        except ValueError:
            print("estbias: error: ESTBIAS_SEED must be an integer", file=sys.stderr)
            return 2
    try:
        env, csv_text = args.func(args)
    except RootFindingError as exc:
        print(f"estbias: solver failure: {exc}", file=sys.stderr)
        return 1
    except (DomainError, OSError) as exc:
        print(f"estbias: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, AssertionError) as exc:
        print(f"estbias: computation failed: {exc}", file=sys.stderr)
        return 1
    for w in env["warnings"]:
        print(f"estbias: warning: {w}", file=sys.stderr)
    sys.stdout.write(to_json(env) if args.format == "json" else csv_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
