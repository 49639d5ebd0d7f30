"""Real-time data sources whose state changes at a fixed frequency.

A source's value is identified by the change interval it was sampled in:
two samples are "the same data" iff they fall in the same half-open interval
``[n/f, (n+1)/f)`` of the same stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import ConfigError, DomainError

SHARED = "shared"
INDEPENDENT = "independent"
MODES = (SHARED, INDEPENDENT)


class DataValue(NamedTuple):
    """Value served by a source at an instant.

    Field order makes tuple comparison the (stream_id, epoch_index) order
    used by the median baseline and the consensus tie-break.
    """

    stream_id: int
    epoch_index: int


@dataclass(frozen=True)
class SignalModel:
    frequency_hz: float
    n_sources: int
    origin_time: float = 0.0
    phase_offsets: tuple[float, ...] = field(default=())
    mode: str = SHARED

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ConfigError(f"signal.frequency_hz must be > 0, got {self.frequency_hz}")
        if self.n_sources < 1:
            raise ConfigError(f"number of sources must be >= 1, got {self.n_sources}")
        if self.mode not in MODES:
            raise ConfigError(f"signal.mode must be one of {MODES}, got {self.mode!r}")
        offsets = tuple(float(x) for x in self.phase_offsets) or (0.0,) * self.n_sources
        if len(offsets) != self.n_sources:
            raise ConfigError(
                f"signal.phase_offsets needs {self.n_sources} entries, got {len(offsets)}"
            )
        period = 1.0 / self.frequency_hz
        for off in offsets:
            if not 0.0 <= off < period:
                raise ConfigError(f"phase offset {off} outside [0, {period})")
        object.__setattr__(self, "phase_offsets", offsets)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency_hz


def sample(model: SignalModel, source_index: int, time: float) -> DataValue:
    """Return the value source ``source_index`` serves at ``time``."""
    if not 0 <= source_index < model.n_sources:
        raise ConfigError(f"source index {source_index} outside [0, {model.n_sources})")
    elapsed = time - model.origin_time - model.phase_offsets[source_index]
    if elapsed < 0:
        raise DomainError(f"time {time} precedes the first interval of source {source_index}")
    stream = source_index if model.mode == INDEPENDENT else 0
    return DataValue(stream, math.floor(elapsed * model.frequency_hz))


def sample_many(model: SignalModel, times: Sequence[float]) -> list[DataValue]:
    """Sample source j at ``times[j]`` for every source."""
    return [sample(model, j, t) for j, t in enumerate(times)]
