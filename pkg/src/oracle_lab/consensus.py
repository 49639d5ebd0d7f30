"""Threshold agreement over the N published representatives.

Signatures are abstracted away: a round succeeds when some value is held by
at least ``t`` nodes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ContractError, DomainError
from .signal import DataValue


@dataclass(frozen=True)
class ConsensusOutcome:
    success: bool
    value: Optional[DataValue]
    support_count: int
    shared_results: tuple[DataValue, ...]
    benefit: int


def _check(representatives: Sequence[DataValue], t: int) -> None:
    if len(representatives) == 0:
        raise DomainError("no representatives to agree on")
    if not 1 <= t <= len(representatives):
        raise ContractError(f"threshold {t} outside [1, {len(representatives)}]")


def task_benefit(representatives: Sequence[DataValue], t: int) -> int:
    """Number of nodes whose representative is shared by at least ``t-1``
    other nodes."""
    _check(representatives, t)
    counts = Counter(representatives)
    return sum(counts[r] - 1 >= t - 1 for r in representatives)


def threshold_consensus(representatives: Sequence[DataValue], t: int) -> ConsensusOutcome:
    _check(representatives, t)
    counts = Counter(representatives)
    # highest multiplicity first, smallest value among equals
    best, support = min(counts.items(), key=lambda vc: (-vc[1], vc[0]))
    success = support >= t
    return ConsensusOutcome(
        success=success,
        value=best if success else None,
        support_count=support,
        shared_results=tuple(representatives),
        benefit=task_benefit(representatives, t),
    )
