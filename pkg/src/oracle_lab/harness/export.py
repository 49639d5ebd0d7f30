"""CSV / JSON exports of a finished campaign.

Column orders are fixed; see ``docs/output-schema.md``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from ..engine import CampaignResult, NetworkState, TaskRecord, records_digest, rolling_mean
from ..errors import OracleLabError
from .config import to_flat, write_cfg

TASKS_COLUMNS = ["task_id", "success", "support_count", "benefit", "rolling_success_50"]
TIMING_COLUMNS = [
    "task_id", "node_id", "source_id", "wait_s", "latency_s", "receive_time_s", "stream_id", "epoch",
]
WAITS_COLUMNS = ["task_id", "node_id", "source_id", "slot", "wait_s"]
BELIEFS_REP_COLUMNS = ["task_id", "node_id", "k", "j", "score"]
BELIEFS_TIM_COLUMNS = ["task_id", "node_id", "k", "j", "l", "score"]


class ExportError(OracleLabError, OSError):
    pass


def strategy_columns(m: int) -> list[str]:
    return ["task_id", "node_id", "chosen_source"] + [f"slot_{j}" for j in range(m)]


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create output directory {out}: {exc}") from None
    return out


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from None


def summary_document(result: CampaignResult) -> dict:
    conv = result.summary["convergence_task"]
    return {
        "config": to_flat(result.config),
        **result.summary,
        "converged_nodes": sum(c is not None for c in conv),
        "records_sha256": records_digest(result.records),
    }


def _task_rows(records: Sequence[TaskRecord]):
    roll = rolling_mean([r.success for r in records])
    for r, rs in zip(records, roll.tolist()):
        yield [r.task_id, int(r.success), r.consensus.support_count, r.benefit, rs]


def _timing_rows(records: Sequence[TaskRecord]):
    for r in records:
        waits, lats, recv = r.wait_s.tolist(), r.latency_s.tolist(), r.receive_time_s.tolist()
        for i, row in enumerate(r.values):
            for j, v in enumerate(row):
                yield [r.task_id, i, j, waits[i][j], lats[i][j], recv[i][j], v.stream_id, v.epoch_index]


def _strategy_rows(records: Sequence[TaskRecord], m: int):
    for r in records:
        slots = r.slots.tolist() if r.slots is not None else None
        for i, c in enumerate(r.chosen_sources):
            yield [r.task_id, i, "" if c is None else c] + (slots[i] if slots else [""] * m)


def _wait_rows(records: Sequence[TaskRecord]):
    for r in records:
        if r.slots is None:
            continue
        slots, waits = r.slots.tolist(), r.wait_s.tolist()
        for i, row in enumerate(slots):
            for j, s in enumerate(row):
                yield [r.task_id, i, j, s, waits[i][j]]


def export_metrics(result: CampaignResult, out_dir) -> list[Path]:
    """Write the standard campaign files; return their paths."""
    out = _prepare(out_dir)
    records = result.records
    m = result.config.m_sources
    paths = [out / "summary.json", out / "tasks.csv", out / "timing.csv", out / "strategy.csv", out / "config.cfg"]
    try:
        with open(paths[0], "w") as fh:
            json.dump(summary_document(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ExportError(f"cannot write {paths[0]}: {exc}") from None
    _write_csv(paths[1], TASKS_COLUMNS, _task_rows(records))
    _write_csv(paths[2], TIMING_COLUMNS, _timing_rows(records))
    _write_csv(paths[3], strategy_columns(m), _strategy_rows(records, m))
    write_cfg(result.config, paths[4])
    if result.config.timing_enabled:
        paths.append(out / "waits.csv")
        _write_csv(paths[-1], WAITS_COLUMNS, _wait_rows(records))
    return paths


class BeliefRecorder:
    """Observer collecting belief snapshots every ``every`` tasks (and on the
    final task) for ``beliefs_rep.csv`` / ``beliefs_tim.csv``."""

    def __init__(self, n_tasks: int, every: int = 1):
        self.every = max(1, every)
        self.last = n_tasks - 1
        self.rep: list[list] = []
        self.tim: list[list] = []

    def __call__(self, record: TaskRecord, state: NetworkState) -> None:
        t = record.task_id
        if t % self.every and t != self.last:
            return
        if state.beliefs is not None:
            for (i, k, j), score in np.ndenumerate(state.beliefs):
                self.rep.append([t, i, k, j, float(score)])
        if state.timing is not None:
            for (i, k, j, l), score in np.ndenumerate(state.timing):
                self.tim.append([t, i, k, j, l, float(score)])

    def write(self, out_dir) -> list[Path]:
        out = _prepare(out_dir)
        paths = []
        if self.rep:
            paths.append(out / "beliefs_rep.csv")
            _write_csv(paths[-1], BELIEFS_REP_COLUMNS, self.rep)
        if self.tim:
            paths.append(out / "beliefs_tim.csv")
            _write_csv(paths[-1], BELIEFS_TIM_COLUMNS, self.tim)
        return paths
