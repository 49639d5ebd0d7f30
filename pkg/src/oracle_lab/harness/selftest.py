"""Quick invariant checks runnable without pytest (``oracle-lab selftest``)."""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .. import analytics
from ..consensus import task_benefit, threshold_consensus
from ..engine import SimConfig, records_digest, run_campaign
from ..latency import LatencyModel
from ..signal import DataValue


def _check_determinism():
    cfg = SimConfig(n_tasks=40, master_seed=7)
    return records_digest(run_campaign(cfg).records) == records_digest(run_campaign(cfg).records)


def _check_homogeneous():
    cfg = SimConfig(
        n_tasks=30,
        timing_enabled=False,
        strategy="median",
        latency=LatencyModel(gaussian_std=0.0, perturbation_high=0.0),
    )
    res = run_campaign(cfg)
    return all(r.success and r.benefit == cfg.n_nodes for r in res.records)


def _check_tail_enumeration():
    for n in range(1, 9):
        for p in (0.1, 0.2, 0.5):
            for t in range(n + 1):
                brute = sum(
                    p ** sum(bits) * (1 - p) ** (n - sum(bits))
                    for bits in itertools.product((0, 1), repeat=n)
                    if sum(bits) >= t
                )
                if abs(brute - analytics.binomial_tail(n, t, p)) > 1e-12:
                    return False
    return True


def _check_benefit_oracle():
    rng = np.random.default_rng(3)
    for _ in range(300):
        n = int(rng.integers(2, 26))
        t = int(rng.integers(1, n + 1))
        reps = [DataValue(0, int(x)) for x in rng.integers(0, 4, size=n)]
        brute = sum(
            sum(reps[k] == reps[i] for k in range(n) if k != i) >= t - 1 for i in range(n)
        )
        out = threshold_consensus(reps, t)
        top = max(Counter(reps).values())
        if task_benefit(reps, t) != brute or out.success != (top >= t):
            return False
    return True


CHECKS = {
    "determinism": _check_determinism,
    "degenerate homogeneity": _check_homogeneous,
    "binomial tail vs enumeration": _check_tail_enumeration,
    "benefit vs brute force": _check_benefit_oracle,
}


def run_selftest(echo=print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        passed = bool(check())
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
