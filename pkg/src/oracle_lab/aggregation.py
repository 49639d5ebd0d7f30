"""Per-node choice of a data representative from the node's M samples.

Three baselines (median, mode, majority vote) and the belief-driven
representative game: each node scores, for every other node k and every
source column j, how often k's published representative coincided with its
own sample from source j, and submits the sample from the best column.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DomainError
from .signal import DataValue

MEDIAN = "median"
MODE = "mode"
VOTE = "vote"
REPAG = "repag"
STRATEGIES = (MEDIAN, MODE, VOTE, REPAG)


@dataclass(frozen=True)
class AggregationOutcome:
    representative: DataValue
    chosen_source_index: Optional[int]


def _check_nonempty(data: Sequence[DataValue]) -> None:
    if len(data) == 0:
        raise DomainError("cannot aggregate an empty data set")


def _draw(data: Sequence[DataValue], candidates: list[DataValue], rng) -> AggregationOutcome:
    # candidates keep first-appearance order so a seeded draw is reproducible
    value = candidates[int(rng.integers(len(candidates)))]
    return AggregationOutcome(value, list(data).index(value))


def _counts(data: Sequence[DataValue]) -> list[tuple[DataValue, int]]:
    return list(Counter(data).items())


def median_agg(data: Sequence[DataValue]) -> AggregationOutcome:
    """Upper median under (stream_id, epoch_index) order."""
    _check_nonempty(data)
    ordered = sorted(data)
    return AggregationOutcome(ordered[len(ordered) // 2], None)


def mode_agg(data: Sequence[DataValue], rng: np.random.Generator) -> AggregationOutcome:
    """Most frequent value.

    With no repeated value, or several values tied for the top count, the
    choice is a uniform draw among the tied values (every value when nothing
    repeats). Exactly one integer is drawn from ``rng`` per call.
    """
    _check_nonempty(data)
    counts = _counts(data)
    top = max(c for _, c in counts)
    return _draw(data, [v for v, c in counts if c == top], rng)


def majority_vote_agg(data: Sequence[DataValue], rng: np.random.Generator) -> AggregationOutcome:
    """Value held by at least ``floor(M/2)+1`` of the samples; otherwise a
    uniform draw among the distinct values."""
    _check_nonempty(data)
    need = len(data) // 2 + 1
    counts = _counts(data)
    winners = [v for v, c in counts if c >= need]
    return _draw(data, winners or [v for v, _ in counts], rng)


# --- belief-driven representative selection ---------------------------------

def init_beliefs(n: int, m: int) -> np.ndarray:
    """Uniform ``n x m`` belief matrix (every entry ``1/m``)."""
    if n < 2 or m < 1:
        raise ContractError(f"belief matrix needs n >= 2 and m >= 1, got ({n}, {m})")
    return np.full((n, m), 1.0 / m)


def _column_argmax(totals: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(totals))


def expected_support(beliefs: np.ndarray, own_index: int) -> np.ndarray:
    """Column sums of the belief matrix over every row except the node's own."""
    return beliefs.sum(axis=0) - beliefs[own_index]


def repag_select(data: Sequence[DataValue], beliefs: np.ndarray, own_index: int) -> AggregationOutcome:
    n, m = beliefs.shape
    if len(data) != m or not 0 <= own_index < n:
        raise ContractError(
            f"belief matrix {beliefs.shape} does not fit {len(data)} samples / node {own_index}"
        )
    j = _column_argmax(expected_support(beliefs, own_index))
    return AggregationOutcome(data[j], j)


def match_matrix(shared_results: Sequence[DataValue], data: Sequence[DataValue]) -> np.ndarray:
    """Boolean ``N x M`` table: ``[k, j]`` is true iff ``R_k == X_j``."""
    return np.array([[r == x for x in data] for r in shared_results], dtype=bool)


def reinforcement(shared_results: Sequence[DataValue], consensus_value: Optional[DataValue]) -> np.ndarray:
    """Per-result boost: 1 for the consensus value, else its share of all results."""
    counts = Counter(shared_results)
    n = len(shared_results)
    return np.array(
        [1.0 if r == consensus_value else counts[r] / n for r in shared_results]
    )


def repag_update(
    beliefs: np.ndarray,
    data: Sequence[DataValue],
    shared_results: Sequence[DataValue],
    consensus_value: Optional[DataValue],
    own_index: int,
) -> np.ndarray:
    """Return updated beliefs after one published round.

    Every other node's result ``R_k`` adds its boost to each column ``j``
    whose own sample equals it (all matching columns when samples repeat).
    The input matrix is not modified.
    """
    n, m = beliefs.shape
    if len(shared_results) != n or len(data) != m:
        raise ContractError(
            f"expected {n} shared results and {m} samples, "
            f"got {len(shared_results)} and {len(data)}"
        )
    gain = reinforcement(shared_results, consensus_value)[:, None] * match_matrix(shared_results, data)
    gain[own_index] = 0.0
    return beliefs + gain


def aggregate(
    strategy: str,
    data: Sequence[DataValue],
    rng: np.random.Generator,
    beliefs: Optional[np.ndarray] = None,
    own_index: int = 0,
) -> AggregationOutcome:
    """Dispatch on the configured strategy name."""
    if strategy == MEDIAN:
        return median_agg(data)
    if strategy == MODE:
        return mode_agg(data, rng)
    if strategy == VOTE:
        return majority_vote_agg(data, rng)
    if strategy == REPAG:
        if beliefs is None:
            raise ContractError("repag strategy needs a belief matrix")
        return repag_select(data, beliefs, own_index)
    raise ContractError(f"unknown aggregation strategy {strategy!r}")
