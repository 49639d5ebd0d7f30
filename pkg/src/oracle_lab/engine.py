"""Task-by-task simulation of an oracle network.

One task: every node detects the request, waits (if learned timing is on),
requests each of the M sources, aggregates its samples into one
representative, and all N representatives go to threshold agreement. The
published results then update every node's beliefs, which persist across
the whole campaign.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from . import aggregation as agg
from . import latency as lat
from . import timing as tim
from .consensus import ConsensusOutcome, threshold_consensus
from .errors import ConfigError, DomainError
from .signal import SHARED, DataValue, SignalModel, sample

log = logging.getLogger(__name__)

ROLLING_WINDOW = 50

# substream slots per node; fixed so adding a purpose never shifts the others
_LINK, _REQUEST, _CHOICE, _JITTER = range(4)


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 21
    m_sources: int = 5
    threshold: int = 11
    n_tasks: int = 1000
    frequency_hz: float = 5.0
    signal_mode: str = SHARED
    phase_offsets: tuple[float, ...] = ()
    latency: lat.LatencyModel = field(default_factory=lat.LatencyModel)
    strategy: str = agg.REPAG
    timing_enabled: bool = True
    timing_k: int = 10
    master_seed: int = 0
    convergence_window: int = 20
    task_spacing_epochs: float = 100.0 + (5 ** 0.5 - 1) / 2
    event_jitter: float = 0.0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ConfigError(f"need at least 2 nodes, got {self.n_nodes}")
        if self.m_sources < 1:
            raise ConfigError(f"need at least 1 source, got {self.m_sources}")
        if not 1 <= self.threshold <= self.n_nodes:
            raise ConfigError(f"threshold {self.threshold} outside [1, {self.n_nodes}]")
        if self.n_tasks < 1:
            raise ConfigError(f"n_tasks must be >= 1, got {self.n_tasks}")
        if self.strategy not in agg.STRATEGIES:
            raise ConfigError(f"aggregation.strategy must be one of {agg.STRATEGIES}")
        if self.timing_k < 1:
            raise ConfigError("timing.k must be >= 1")
        if self.convergence_window < 1:
            raise ConfigError("convergence window must be >= 1")
        if self.task_spacing_epochs < 1:
            raise ConfigError("task spacing must be >= 1 interval")
        if self.event_jitter < 0:
            raise ConfigError("event jitter must be >= 0")
        if self.master_seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        self.signal  # validates frequency and phase offsets

    @property
    def signal(self) -> SignalModel:
        return SignalModel(
            frequency_hz=self.frequency_hz,
            n_sources=self.m_sources,
            phase_offsets=self.phase_offsets,
            mode=self.signal_mode,
        )

    @property
    def task_spacing(self) -> float:
        return self.task_spacing_epochs / self.frequency_hz

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class NetworkState:
    """Mutable learning state of every node, stacked along the first axis.

    ``beliefs[i]`` is node i's ``N x M`` representative-belief matrix and
    ``timing[i]`` its ``N x M x k`` wait-belief tensor.
    """

    streams: list[list[np.random.Generator]]
    link_base: np.ndarray  # (N, M) held base latency, zeros when redrawn per request
    beliefs: Optional[np.ndarray]  # (N, N, M)
    timing: Optional[np.ndarray]  # (N, N, M, k)
    latency_count: np.ndarray  # (N,)
    latency_mean: np.ndarray  # (N,)
    initial_omega: float

    def omega(self) -> np.ndarray:
        """Per-node wait span: running mean latency, or the model mean before
        any observation."""
        known = (self.latency_count > 0) & (self.latency_mean > 0)
        return np.where(known, self.latency_mean, self.initial_omega)


@dataclass
class TaskRecord:
    task_id: int
    start_time: float
    wait_s: np.ndarray  # (N, M)
    latency_s: np.ndarray  # (N, M)
    receive_time_s: np.ndarray  # (N, M)
    values: list[list[DataValue]]  # [node][source]
    representatives: list[DataValue]
    chosen_sources: list[Optional[int]]
    slots: Optional[np.ndarray]  # (N, M) or None without learned timing
    consensus: ConsensusOutcome

    @property
    def success(self) -> bool:
        return self.consensus.success

    @property
    def benefit(self) -> int:
        return self.consensus.benefit

    def strategy_key(self, node: int) -> Hashable:
        slots = None if self.slots is None else tuple(int(s) for s in self.slots[node])
        return (self.chosen_sources[node], slots)


def node_streams(master_seed: int, n_nodes: int) -> list[list[np.random.Generator]]:
    """Independent generators per (node, purpose) derived from one seed."""
    root = np.random.SeedSequence(master_seed)
    return [
        [np.random.default_rng(s) for s in child.spawn(4)]
        for child in root.spawn(n_nodes)
    ]


def init_state(config: SimConfig) -> NetworkState:
    n, m = config.n_nodes, config.m_sources
    model = config.latency
    streams = node_streams(config.master_seed, n)
    base = np.zeros((n, m))
    if model.persistence == lat.PER_LINK:
        for i in range(n):
            base[i] = [lat.draw_base(model, streams[i][_LINK]) for _ in range(m)]
    beliefs = timing = None
    if config.strategy == agg.REPAG:
        beliefs = np.stack([agg.init_beliefs(n, m) for _ in range(n)])
    if config.timing_enabled:
        timing = np.stack([tim.init_timing_beliefs(n, m, config.timing_k) for _ in range(n)])
    return NetworkState(
        streams=streams,
        link_base=base,
        beliefs=beliefs,
        timing=timing,
        latency_count=np.zeros(n, dtype=int),
        latency_mean=np.zeros(n),
        initial_omega=model.nominal_mean(),
    )


def _value_codes(streams: np.ndarray, epochs: np.ndarray) -> np.ndarray:
    return streams.astype(np.int64) * (1 << 40) + epochs


def _sample_grid(signal: SignalModel, receive: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`oracle_lab.signal.sample` over an (N, M) time grid."""
    m = receive.shape[1]
    elapsed = receive - signal.origin_time - np.asarray(signal.phase_offsets)[None, :]
    if (elapsed < 0).any():
        i, j = np.argwhere(elapsed < 0)[0]
        raise DomainError(f"node {i} samples source {j} before its first interval")
    epochs = np.floor(elapsed * signal.frequency_hz).astype(np.int64)
    if signal.mode == SHARED:
        streams = np.zeros_like(epochs)
    else:
        streams = np.broadcast_to(np.arange(m), epochs.shape).astype(np.int64)
    return streams, epochs


def batch_repag_select(beliefs: np.ndarray) -> np.ndarray:
    """Chosen column for every node at once; see :func:`aggregation.repag_select`."""
    idx = np.arange(beliefs.shape[0])
    return np.argmax(beliefs.sum(axis=1) - beliefs[idx, idx], axis=1)


def batch_choose_slots(timing: np.ndarray) -> np.ndarray:
    """Slot index per (node, source); see :func:`timing.choose_wait`."""
    idx = np.arange(timing.shape[0])
    return np.argmax(timing.sum(axis=1) - timing[idx, idx], axis=2)


def _others_match(rep_codes: np.ndarray, val_codes: np.ndarray) -> np.ndarray:
    # match[i, k, j]: node k's result equals node i's sample from source j
    match = rep_codes[None, :, None] == val_codes[:, None, :]
    idx = np.arange(len(rep_codes))
    match[idx, idx, :] = False
    return match


def batch_repag_update(beliefs, rep_codes, val_codes, gain) -> np.ndarray:
    return beliefs + gain[None, :, None] * _others_match(rep_codes, val_codes)


def batch_timopt_update(timing, slots, rep_codes, val_codes, adjustment) -> np.ndarray:
    n, _, m, _ = timing.shape
    out = timing.copy()
    ii = np.arange(n)[:, None, None]
    kk = np.arange(n)[None, :, None]
    jj = np.arange(m)[None, None, :]
    out[ii, kk, jj, slots[:, None, :]] += adjustment[None, :, None] * _others_match(rep_codes, val_codes)
    return out


def run_task(state: NetworkState, config: SimConfig, task_index: int) -> TaskRecord:
    """Run one request task and apply every node's belief updates in place."""
    n, m = config.n_nodes, config.m_sources
    signal = config.signal
    model = config.latency
    start = task_index * config.task_spacing

    detect = np.full(n, start)
    if config.event_jitter > 0:
        detect += [float(s[_JITTER].uniform(0.0, config.event_jitter)) for s in state.streams]

    slots = None
    waits = np.zeros((n, m))
    if state.timing is not None:
        slots = batch_choose_slots(state.timing)
        waits = (slots + 1) * (state.omega() / config.timing_k)[:, None]

    if model.persistence == lat.PER_LINK:
        jitter = np.array([
            [lat.draw_perturbation(model, s[_REQUEST]) for _ in range(m)] for s in state.streams
        ])
        latencies = state.link_base + jitter
    else:
        latencies = np.array([
            [lat.sample_latency(model, s[_REQUEST]) for _ in range(m)] for s in state.streams
        ])
    receive = detect[:, None] + waits + latencies
    stream_ids, epochs = _sample_grid(signal, receive)
    values = [
        [DataValue(int(a), int(b)) for a, b in zip(stream_ids[i], epochs[i])] for i in range(n)
    ]

    if config.strategy == agg.REPAG:
        cols = batch_repag_select(state.beliefs)
        chosen = [int(c) for c in cols]
        reps = [values[i][c] for i, c in enumerate(chosen)]
    else:
        outs = [
            agg.aggregate(config.strategy, values[i], state.streams[i][_CHOICE]) for i in range(n)
        ]
        chosen = [o.chosen_source_index for o in outs]
        reps = [o.representative for o in outs]

    outcome = threshold_consensus(reps, config.threshold)

    val_codes = _value_codes(stream_ids, epochs)
    rep_codes = np.array([_value_codes(np.int64(r.stream_id), np.int64(r.epoch_index)) for r in reps])
    if state.beliefs is not None:
        gain = agg.reinforcement(reps, outcome.value)
        state.beliefs = batch_repag_update(state.beliefs, rep_codes, val_codes, gain)
    if state.timing is not None:
        adj = tim.timing_adjustment(reps, outcome.value, config.threshold)
        state.timing = batch_timopt_update(state.timing, slots, rep_codes, val_codes, adj)
    # running mean over this task's M latencies, one observation at a time
    for j in range(m):
        state.latency_count += 1
        state.latency_mean += (latencies[:, j] - state.latency_mean) / state.latency_count

    return TaskRecord(
        task_id=task_index,
        start_time=start,
        wait_s=waits,
        latency_s=latencies,
        receive_time_s=receive,
        values=values,
        representatives=reps,
        chosen_sources=chosen,
        slots=slots,
        consensus=outcome,
    )


def detect_convergence(history: Sequence[Sequence[Hashable]], window: int) -> list[Optional[int]]:
    """Per node, the first task from which its strategy stays the same for
    ``window`` consecutive tasks (``None`` if that never happens)."""
    if window < 1:
        raise ConfigError("window must be >= 1")
    result: list[Optional[int]] = []
    for seq in history:
        found = None
        run_start = 0
        for idx in range(len(seq)):
            if idx > 0 and seq[idx] != seq[idx - 1]:
                run_start = idx
            if idx - run_start + 1 >= window:
                found = run_start
                break
        result.append(found)
    return result


def rolling_mean(flags: Sequence[float], window: int = ROLLING_WINDOW) -> np.ndarray:
    """Trailing mean over the last ``window`` entries (fewer at the start)."""
    x = np.asarray(flags, dtype=float)
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


@dataclass
class CampaignResult:
    config: SimConfig
    records: list[TaskRecord]
    summary: dict


def summarize(config: SimConfig, records: Sequence[TaskRecord]) -> dict:
    success = np.array([r.success for r in records], dtype=float)
    benefit = np.array([r.benefit for r in records], dtype=float)
    history = [[r.strategy_key(i) for r in records] for i in range(config.n_nodes)]
    conv = detect_convergence(history, config.convergence_window)
    return {
        "n_tasks": len(records),
        "success_rate": float(success.mean()),
        "mean_benefit": float(benefit.mean()),
        "mean_benefit_successful": float(benefit[success == 1].mean()) if success.any() else 0.0,
        "rolling_success_final": float(rolling_mean(success)[-1]),
        "convergence_task": conv,
    }


def run_campaign(config: SimConfig, observers: Sequence[Callable] = ()) -> CampaignResult:
    """Run ``config.n_tasks`` tasks on one timeline.

    Each observer is called as ``observer(record, state)`` after every task;
    observers must not mutate the state.
    """
    state = init_state(config)
    records = []
    for t in range(config.n_tasks):
        rec = run_task(state, config, t)
        for obs in observers:
            obs(rec, state)
        records.append(rec)
    summary = summarize(config, records)
    log.info(
        "campaign strategy=%s timing=%s f=%s: success %.3f, benefit %.2f",
        config.strategy, config.timing_enabled, config.frequency_hz,
        summary["success_rate"], summary["mean_benefit"],
    )
    return CampaignResult(config, records, summary)


def config_to_dict(config: SimConfig) -> dict:
    d = asdict(config)
    d["phase_offsets"] = list(config.phase_offsets)
    return d


def records_digest(records: Sequence[TaskRecord]) -> str:
    """SHA-256 over a canonical serialization of every record."""
    h = hashlib.sha256()
    for r in records:
        h.update(json.dumps({
            "task": r.task_id,
            "wait": r.wait_s.tolist(),
            "lat": r.latency_s.tolist(),
            "recv": r.receive_time_s.tolist(),
            "vals": r.values,
            "reps": r.representatives,
            "chosen": r.chosen_sources,
            "slots": None if r.slots is None else r.slots.tolist(),
            "ok": r.success,
            "support": r.consensus.support_count,
            "benefit": r.benefit,
        }).encode())
    return h.hexdigest()
