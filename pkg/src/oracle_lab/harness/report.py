"""Matplotlib figures rendered next to the CSV exports.

PNG metadata is stripped so figures are byte-stable for a given seed.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..engine import CampaignResult, rolling_mean  # noqa: E402

STRATEGY_ORDER = ["median", "mode", "vote", "repag"]
_PNG_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
    return path


def campaign_figures(result: CampaignResult, out_dir, first: int = 50) -> list[Path]:
    out = Path(out_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    recs = result.records
    tasks = np.arange(len(recs))
    success = np.array([r.success for r in recs], dtype=float)
    benefit = np.array([r.benefit for r in recs], dtype=float)
    paths = []

    fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
    axes[0].plot(tasks, benefit, lw=0.4, color="tab:blue", alpha=0.3)
    axes[0].plot(tasks, rolling_mean(benefit), lw=1.2, color="tab:blue", label="rolling mean (50)")
    axes[0].axhline(cfg.threshold, ls="--", color="grey", lw=0.8, label=f"t = {cfg.threshold}")
    axes[0].set_xlabel("task")
    axes[0].set_ylabel("benefit")
    axes[0].set_ylim(0, cfg.n_nodes + 0.5)
    axes[0].legend(loc="lower right")
    head = min(first, len(recs))
    axes[1].plot(tasks[:head], benefit[:head], marker="o", ms=3, lw=0.8)
    axes[1].set_xlabel(f"task (first {head})")
    axes[1].set_ylim(0, cfg.n_nodes + 0.5)
    paths.append(_save(fig, out / "benefit.png"))

    fig, ax = plt.subplots(figsize=(6, 3.4))
    ax.plot(tasks, rolling_mean(success), lw=1.0)
    ax.set_xlabel("task")
    ax.set_ylabel("success rate (rolling 50)")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"{cfg.strategy}{' + timing' if cfg.timing_enabled else ''}, f = {cfg.frequency_hz:g} Hz")
    paths.append(_save(fig, out / "success.png"))

    # response offsets (wait + latency) per source for a few nodes
    nodes = list(range(min(3, cfg.n_nodes)))
    fig, ax = plt.subplots(figsize=(7, 3.4))
    period = 1.0 / cfg.frequency_hz
    for n in nodes:
        offs = np.array([r.receive_time_s[n] - r.start_time for r in recs[:head]])
        ax.scatter(offs.ravel(), np.full(offs.size, n) + np.tile(np.linspace(-0.3, 0.3, cfg.m_sources), head),
                   s=4, alpha=0.5, label=f"node {n}")
    top = ax.get_xlim()[1]
    for x in np.arange(0.0, top, period):
        ax.axvline(x, color="lightgrey", lw=0.5, zorder=0)
    ax.set_yticks(nodes)
    ax.set_xlabel("seconds after task start")
    ax.set_ylabel("node")
    paths.append(_save(fig, out / "timing.png"))

    if cfg.strategy == "repag":
        grid = np.array([[r.chosen_sources[i] for r in recs[:100]] for i in range(cfg.n_nodes)])
        fig, ax = plt.subplots(figsize=(8, 3.6))
        im = ax.imshow(grid, aspect="auto", interpolation="nearest", cmap="viridis",
                       vmin=0, vmax=cfg.m_sources - 1)
        ax.set_xlabel("task")
        ax.set_ylabel("node")
        fig.colorbar(im, ax=ax, label="chosen source")
        paths.append(_save(fig, out / "strategy_repag.png"))

    if cfg.timing_enabled:
        grid = np.concatenate([r.slots.reshape(-1, 1) for r in recs[:head]], axis=1)
        fig, ax = plt.subplots(figsize=(8, 5))
        im = ax.imshow(grid, aspect="auto", interpolation="nearest", cmap="magma",
                       vmin=0, vmax=cfg.timing_k - 1)
        ax.set_xlabel("task")
        ax.set_ylabel("node x source")
        fig.colorbar(im, ax=ax, label="wait slot")
        paths.append(_save(fig, out / "strategy_timing.png"))
    return paths


def sweep_figure(rows: Sequence[dict], out_dir) -> list[Path]:
    """Grouped success-rate bars per frequency, one panel per (latency, timing)."""
    out = Path(out_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)
    panels = sorted({(r["latency"], r["timing"]) for r in rows})
    freqs = sorted({r["frequency_hz"] for r in rows})
    strategies = [s for s in STRATEGY_ORDER if any(r["strategy"] == s for r in rows)]
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.4), squeeze=False)
    width = 0.8 / max(1, len(strategies))
    for ax, (kind, timing) in zip(axes[0], panels):
        for si, s in enumerate(strategies):
            ys = []
            for f in freqs:
                vals = [r["success_rate"] for r in rows
                        if r["latency"] == kind and r["timing"] == timing and r["strategy"] == s
                        and r["frequency_hz"] == f]
                ys.append(np.mean(vals) if vals else np.nan)
            ax.bar(np.arange(len(freqs)) + si * width, ys, width, label=s)
        ax.set_xticks(np.arange(len(freqs)) + width * (len(strategies) - 1) / 2)
        ax.set_xticklabels([f"{f:g} Hz" for f in freqs])
        ax.set_ylim(0, 1.05)
        ax.set_title(f"{kind}, timing {'on' if timing else 'off'}")
    axes[0][0].set_ylabel("consensus success rate")
    axes[0][-1].legend(fontsize=8)
    paths = [_save(fig, out / "success_by_frequency.png")]

    sizes = sorted({r["n_nodes"] for r in rows})
    if len(sizes) > 1:
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        for key in sorted({(r["latency"], r["strategy"], r["timing"]) for r in rows}):
            pts = sorted((r["n_nodes"], r["success_rate"]) for r in rows
                         if (r["latency"], r["strategy"], r["timing"]) == key)
            ax.plot(*zip(*pts), marker="o", label=f"{key[1]}{'+T' if key[2] else ''} ({key[0]})")
        ax.set_xlabel("nodes N")
        ax.set_ylabel("success rate")
        ax.legend(fontsize=7)
        paths.append(_save(fig, out / "robustness_nodes.png"))
    return paths


def analytic_figure(rows: Sequence[dict], out_dir) -> Path:
    """Closed-form success rate against threshold, one line per N."""
    out = Path(out_dir) / "figures"
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    for n in sorted({r["N"] for r in rows}):
        pts = sorted((r["t"], r["rate"]) for r in rows if r["N"] == n)
        ax.semilogy(*zip(*pts), marker=".", label=f"N = {n}")
    ax.set_xlabel("threshold t")
    ax.set_ylabel("success rate")
    ax.legend(fontsize=8)
    return _save(fig, out / "analytic_rate.png")
