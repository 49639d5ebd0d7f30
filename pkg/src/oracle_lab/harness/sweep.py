"""Grids of independent campaigns."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from ..engine import SimConfig, run_campaign
from ..errors import ConfigError
from .export import _write_csv, export_metrics

MAJORITY = 0  # threshold placeholder meaning floor(N/2) + 1

SWEEP_COLUMNS = [
    "campaign", "latency", "frequency_hz", "strategy", "timing", "n_nodes", "threshold",
    "success_rate", "mean_benefit", "converged_nodes",
]


@dataclass(frozen=True)
class SweepSpec:
    frequencies: tuple[float, ...] = (2.0, 5.0, 8.0, 10.0)
    strategies: tuple[str, ...] = ("median", "mode", "vote", "repag")
    timing: tuple[bool, ...] = (False, True)
    latency_kinds: tuple[str, ...] = ("gaussian",)
    node_counts: tuple[int, ...] = (21,)
    thresholds: tuple[int, ...] = (11,)

    def __post_init__(self):
        for name in ("frequencies", "strategies", "timing", "latency_kinds", "node_counts", "thresholds"):
            if not getattr(self, name):
                raise ConfigError(f"sweep axis {name} is empty")

    def configs(self, base: SimConfig) -> list[SimConfig]:
        out = []
        for kind, f, s, tm, n, t in itertools.product(
            self.latency_kinds, self.frequencies, self.strategies, self.timing,
            self.node_counts, self.thresholds,
        ):
            thr = n // 2 + 1 if t == MAJORITY else t
            if thr > n:
                continue
            out.append(base.with_(
                latency=replace(base.latency, kind=kind), frequency_hz=f, strategy=s,
                timing_enabled=tm, n_nodes=n, threshold=thr,
            ))
        return out


def campaign_name(cfg: SimConfig) -> str:
    return (f"{cfg.latency.kind}_f{cfg.frequency_hz:g}_{cfg.strategy}"
            f"_{'tim' if cfg.timing_enabled else 'notim'}_n{cfg.n_nodes}_t{cfg.threshold}")


def _run_one(args):
    cfg, out_dir, figures = args
    result = run_campaign(cfg)
    name = campaign_name(cfg)
    if out_dir is not None:
        export_metrics(result, Path(out_dir) / name)
        if figures:
            from .report import campaign_figures
            campaign_figures(result, Path(out_dir) / name)
    s = result.summary
    return {
        "campaign": name,
        "latency": cfg.latency.kind,
        "frequency_hz": cfg.frequency_hz,
        "strategy": cfg.strategy,
        "timing": cfg.timing_enabled,
        "n_nodes": cfg.n_nodes,
        "threshold": cfg.threshold,
        "success_rate": s["success_rate"],
        "mean_benefit": s["mean_benefit"],
        "converged_nodes": sum(c is not None for c in s["convergence_task"]),
    }


def run_sweep(spec: SweepSpec, base: SimConfig, out_dir=None, jobs: int = 1,
              figures: bool = False) -> list[dict]:
    """Run every campaign of the grid; campaigns share no state, so ``jobs > 1``
    fans them out to worker processes without changing any result."""
    work = [(cfg, out_dir, figures) for cfg in spec.configs(base)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, work))
    else:
        rows = [_run_one(w) for w in work]
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        _write_csv(Path(out_dir) / "sweep.csv", SWEEP_COLUMNS,
                   ([r[c] for c in SWEEP_COLUMNS] for r in rows))
        if figures:
            from .report import sweep_figure
            sweep_figure(rows, out_dir)
    return rows


def parse_list(text: Optional[str], conv, default):
    if text is None:
        return tuple(default)
    try:
        items = tuple(conv(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from None
    if not items:
        raise ConfigError(f"empty list {text!r}")
    return items
