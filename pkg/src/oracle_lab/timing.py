"""Learned per-source waiting times.

Before requesting source j a node pauses for one of k equally spaced waits
``Ω/k, 2Ω/k, ..., Ω``, where Ω is the node's running mean request latency.
The slot is the argmax of a belief tensor summed over the other nodes.
After each round the slot the node actually used for source j gains +1 per
other node whose published result matched the sample and was the consensus
value, and ``(count - t)/t`` per matching non-consensus result, so losing
values are penalised instead of reinforced.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .aggregation import match_matrix
from .errors import ContractError
from .signal import DataValue


@dataclass(frozen=True)
class WaitStrategySpace:
    omega: float
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ContractError(f"wait space needs k >= 1, got {self.k}")
        if not self.omega > 0:
            raise ContractError(f"wait span must be positive, got {self.omega}")

    @property
    def slots(self) -> np.ndarray:
        return (np.arange(self.k) + 1) * (self.omega / self.k)

    def wait(self, slot: int) -> float:
        return (slot + 1) * self.omega / self.k


@dataclass(frozen=True)
class RunningLatencyStats:
    count: int = 0
    mean: float = 0.0


def update_omega(stats: RunningLatencyStats, observed_latency: float) -> RunningLatencyStats:
    if observed_latency < 0:
        raise ContractError(f"latency must be >= 0, got {observed_latency}")
    count = stats.count + 1
    return RunningLatencyStats(count, stats.mean + (observed_latency - stats.mean) / count)


def init_timing_beliefs(n: int, m: int, k: int) -> np.ndarray:
    if n < 2 or m < 1 or k < 1:
        raise ContractError(f"timing tensor needs n >= 2, m >= 1, k >= 1, got ({n}, {m}, {k})")
    return np.full((n, m, k), 1.0 / k)


def choose_wait(
    tensor: np.ndarray, source_j: int, own_index: int, space: WaitStrategySpace
) -> tuple[int, float]:
    """Best slot for ``source_j`` (lowest index on ties) and its wait in seconds."""
    n, m, k = tensor.shape
    if k != space.k or not 0 <= source_j < m or not 0 <= own_index < n:
        raise ContractError(
            f"tensor {tensor.shape} does not fit source {source_j}, node {own_index}, k={space.k}"
        )
    column = tensor[:, source_j, :]
    slot = int(np.argmax(column.sum(axis=0) - column[own_index]))
    return slot, space.wait(slot)


def choose_waits(tensor: np.ndarray, own_index: int, space: WaitStrategySpace) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`choose_wait` over all sources."""
    if tensor.shape[2] != space.k:
        raise ContractError(f"tensor {tensor.shape} does not fit k={space.k}")
    totals = tensor.sum(axis=0) - tensor[own_index]
    slots = np.argmax(totals, axis=1)
    return slots, (slots + 1) * (space.omega / space.k)


def timing_adjustment(
    shared_results: Sequence[DataValue], consensus_value: Optional[DataValue], t: int
) -> np.ndarray:
    counts = Counter(shared_results)
    return np.array(
        [1.0 if r == consensus_value else (counts[r] - t) / t for r in shared_results]
    )


def timopt_update(
    tensor: np.ndarray,
    own_slots: Sequence[int],
    data: Sequence[DataValue],
    shared_results: Sequence[DataValue],
    consensus_value: Optional[DataValue],
    t: int,
    own_index: int,
) -> np.ndarray:
    """Return the tensor after one round; the input is left untouched."""
    n, m, _ = tensor.shape
    if len(own_slots) != m or len(data) != m or len(shared_results) != n:
        raise ContractError(
            f"expected {m} slots, {m} samples and {n} shared results, got "
            f"{len(own_slots)}, {len(data)} and {len(shared_results)}"
        )
    gain = timing_adjustment(shared_results, consensus_value, t)[:, None] * match_matrix(shared_results, data)
    gain[own_index] = 0.0
    out = tensor.copy()
    out[:, np.arange(m), np.asarray(own_slots, dtype=int)] += gain
    return out
