"""Network response durations: clamped Gaussian or uniform base plus a
small uniform perturbation.

Each call consumes exactly two draws from the generator (one base, one
perturbation) so streams stay aligned whatever the parameters are.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
KINDS = (GAUSSIAN, UNIFORM)

# Where the base draw lives: redrawn for every request, or drawn once per
# (node, source) link and held for the whole campaign.
PER_REQUEST = "request"
PER_LINK = "link"
PERSISTENCE = (PER_REQUEST, PER_LINK)


@dataclass(frozen=True)
class LatencyModel:
    kind: str = GAUSSIAN
    gaussian_mean: float = 0.7
    gaussian_std: float = 0.2887
    uniform_low: float = 0.02
    uniform_high: float = 1.02
    perturbation_high: float = 0.1
    persistence: str = PER_LINK

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"latency.kind must be one of {KINDS}, got {self.kind!r}")
        if self.persistence not in PERSISTENCE:
            raise ConfigError(
                f"latency.persistence must be one of {PERSISTENCE}, got {self.persistence!r}"
            )
        # zero spread is allowed: the degenerate models are used as oracles
        if self.gaussian_std < 0:
            raise ConfigError(f"latency.gaussian_std must be >= 0, got {self.gaussian_std}")
        if self.uniform_low > self.uniform_high:
            raise ConfigError("latency.uniform_low must not exceed latency.uniform_high")
        if self.perturbation_high < 0:
            raise ConfigError("latency.perturbation_high must be >= 0")

    def nominal_mean(self) -> float:
        """Unclamped base mean plus mean perturbation; seeds the first wait space."""
        if self.kind == GAUSSIAN:
            base = self.gaussian_mean
        else:
            base = 0.5 * (self.uniform_low + self.uniform_high)
        return max(0.0, base) + 0.5 * self.perturbation_high


def draw_base(model: LatencyModel, rng: np.random.Generator) -> float:
    """One clamped base draw, ``max(0, X)``."""
    if model.kind == GAUSSIAN:
        x = rng.normal(model.gaussian_mean, model.gaussian_std)
    else:
        x = rng.uniform(model.uniform_low, model.uniform_high)
    return max(0.0, float(x))


def draw_perturbation(model: LatencyModel, rng: np.random.Generator) -> float:
    return float(rng.uniform(0.0, model.perturbation_high))


def sample_latency(model: LatencyModel, rng: np.random.Generator) -> float:
    """Full request latency: clamped base draw, then additive perturbation."""
    base = draw_base(model, rng)
    return base + draw_perturbation(model, rng)
