"""Command line entry point: ``oracle-lab {simulate,sweep,analytic,validate,selftest}``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .. import analytics
from ..errors import OracleLabError
from . import config as cfgmod
from .sweep import MAJORITY, SweepSpec, parse_list, run_sweep

log = logging.getLogger("oracle_lab")

# closed-form parameterization that reproduces the reference rate table
TABLE_FIT = {"a": 0.0, "b": 1.0, "f": 6.0}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default="base", help="config file, or 'base' for the built-in defaults")
    p.add_argument("--seed", type=int, default=None, help="master seed (falls back to $ORACLE_LAB_SEED)")
    p.add_argument("--tasks", type=int, default=None, help="number of tasks per campaign")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one dotted config key, e.g. latency.kind=uniform")
    p.add_argument("--figures", action="store_true", help="also render PNG figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oracle-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one campaign and export its metrics")
    _common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-beliefs", type=int, default=0, metavar="EVERY",
                   help="write belief snapshots every EVERY tasks (0 = off)")

    p = sub.add_parser("sweep", help="run a grid of campaigns")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--freqs", help="comma list, default 2,5,8,10")
    p.add_argument("--strategies", help="comma list from median,mode,vote,repag")
    p.add_argument("--timing", help="comma list of off,on (default both)")
    p.add_argument("--latency", help="comma list of gaussian,uniform (default gaussian)")
    p.add_argument("--nodes", help="comma list of node counts (default 21)")
    p.add_argument("--thresholds", help="comma list of thresholds, or 'majority' (default 11)")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("analytic", help="closed-form success rates")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--a", type=float, default=0.02)
    p.add_argument("--b", type=float, default=1.02)
    p.add_argument("--f", type=float, default=5.0)
    p.add_argument("--out", help="write analytic.csv (and figures) here")
    p.add_argument("--figures", action="store_true")

    p = sub.add_parser("validate", help="closed form against Monte Carlo")
    p.add_argument("--nodes", default="11,21", help="comma list of N")
    p.add_argument("--thresholds", default="majority", help="comma list of t, or 'majority'")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--f", type=float, default=10.0)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _config(args):
    overrides = list(args.overrides)
    if args.tasks is not None:
        overrides.append(f"run.n_tasks={args.tasks}")
    return cfgmod.load_config(args.config, overrides, args.seed)


def _emit(rows, columns, out_path=None):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] for c in columns])
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="") as fh:
            fw = csv.writer(fh, lineterminator="\n")
            fw.writerow(columns)
            fw.writerows([r[c] for c in columns] for r in rows)


def _on_off(text: str) -> bool:
    word = text.strip()
    if word not in ("on", "off"):
        raise ValueError(f"expected on/off, got {word!r}")
    return word == "on"


def cmd_simulate(args) -> int:
    from ..engine import run_campaign
    from .export import BeliefRecorder, export_metrics

    config = _config(args)
    observers = []
    recorder = None
    if args.dump_beliefs > 0:
        recorder = BeliefRecorder(config.n_tasks, args.dump_beliefs)
        observers.append(recorder)
    result = run_campaign(config, observers)
    paths = export_metrics(result, args.out)
    if recorder is not None:
        paths += recorder.write(args.out)
    if args.figures:
        from .report import campaign_figures
        paths += campaign_figures(result, args.out)
    s = result.summary
    print(f"success_rate={s['success_rate']:.4f} mean_benefit={s['mean_benefit']:.3f} "
          f"tasks={s['n_tasks']} out={args.out}")
    return 0


def cmd_sweep(args) -> int:
    base = _config(args)
    timing = parse_list(args.timing, _on_off, (False, True))
    thresholds = parse_list(
        args.thresholds, lambda x: MAJORITY if x.strip() == "majority" else int(x), (base.threshold,)
    )
    spec = SweepSpec(
        frequencies=parse_list(args.freqs, float, (2, 5, 8, 10)),
        strategies=parse_list(args.strategies, str.strip, ("median", "mode", "vote", "repag")),
        timing=timing,
        latency_kinds=parse_list(args.latency, str.strip, ("gaussian",)),
        node_counts=parse_list(args.nodes, int, (base.n_nodes,)),
        thresholds=thresholds,
    )
    rows = run_sweep(spec, base, args.out, jobs=args.jobs, figures=args.figures)
    _emit(rows, ["campaign", "success_rate", "mean_benefit"])
    return 0


def cmd_analytic(args) -> int:
    out = Path(args.out) if args.out else None
    if args.n is not None or args.t is not None:
        if args.n is None or args.t is None:
            raise OracleLabError("--n and --t go together")
        params = analytics.AnalyticParams(args.n, args.t, args.a, args.b, args.f)
        rows = [{"N": args.n, "t": args.t, "p": analytics.interval_hit_prob(params),
                 "rate": analytics.consensus_success_rate(params)}]
        _emit(rows, ["N", "t", "p", "rate"], out / "analytic.csv" if out else None)
        return 0
    pairs = list(analytics.REFERENCE_RATES)
    given = analytics.rate_table(pairs, args.a, args.b, args.f)
    fitted = analytics.rate_table(pairs, TABLE_FIT["a"], TABLE_FIT["b"], TABLE_FIT["f"])
    rows = [
        {"N": g["N"], "t": g["t"], "reference_pct": analytics.REFERENCE_RATES[(g["N"], g["t"])],
         "rate_pct": 100 * g["rate"], "rate_pct_6_intervals": 100 * h["rate"]}
        for g, h in zip(given, fitted)
    ]
    _emit(rows, ["N", "t", "reference_pct", "rate_pct", "rate_pct_6_intervals"],
          out / "analytic.csv" if out else None)
    if args.figures and out is not None:
        from .report import analytic_figure
        curve = analytics.rate_table([(n, t) for n in (11, 21, 31) for t in range(2, n + 1)],
                                     args.a, args.b, args.f)
        analytic_figure(curve, out)
    return 0


def cmd_validate(args) -> int:
    nodes = parse_list(args.nodes, int, (11, 21))
    seed = args.seed if args.seed is not None else int(os.environ.get(cfgmod.SEED_ENV, 0))
    rng = np.random.default_rng(seed)
    rows = []
    for n in nodes:
        ts = parse_list(args.thresholds, lambda x: n // 2 + 1 if x.strip() == "majority" else int(x), ())
        for t in ts:
            params = analytics.AnalyticParams(n, t, args.a, args.b, args.f)
            mc = analytics.monte_carlo_rate(params, args.trials, rng)
            rate = analytics.consensus_success_rate(params)
            rows.append({"N": n, "t": t, "analytic": rate, "monte_carlo": mc.rate, "stderr": mc.stderr})
    _emit(rows, ["N", "t", "analytic", "monte_carlo", "stderr"],
          Path(args.out) / "validate.csv" if args.out else None)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest() else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "analytic": cmd_analytic,
    "validate": cmd_validate,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except OracleLabError as exc:
        print(f"oracle-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
