import numpy as np
import pytest

from oracle_lab import aggregation as agg
from oracle_lab import timing as tim
from oracle_lab.engine import (
    SimConfig,
    _others_match,
    _value_codes,
    batch_choose_slots,
    batch_repag_select,
    batch_repag_update,
    batch_timopt_update,
    detect_convergence,
    init_state,
    records_digest,
    rolling_mean,
    run_campaign,
    run_task,
)
from oracle_lab.errors import ConfigError
from oracle_lab.latency import LatencyModel
from oracle_lab.signal import DataValue, sample

FLAT = LatencyModel(gaussian_std=0.0, perturbation_high=0.0)


def test_task_record_shape_and_receive_times():
    cfg = SimConfig(n_tasks=3)
    state = init_state(cfg)
    rec = run_task(state, cfg, 2)
    assert rec.wait_s.shape == (21, 5) and len(rec.values) * len(rec.values[0]) == 105
    assert np.allclose(rec.receive_time_s, rec.start_time + rec.wait_s + rec.latency_s)
    assert np.all(rec.receive_time_s >= rec.start_time + rec.latency_s)
    sig = cfg.signal
    for i in range(21):
        for j in range(5):
            assert rec.values[i][j] == sample(sig, j, rec.receive_time_s[i, j])


def test_timing_disabled_means_no_waits():
    res = run_campaign(SimConfig(n_tasks=5, timing_enabled=False))
    assert all(np.all(r.wait_s == 0) and r.slots is None for r in res.records)


@pytest.mark.parametrize("strategy", agg.STRATEGIES)
@pytest.mark.parametrize("timing", [False, True])
def test_homogeneous_network_always_agrees(strategy, timing):
    cfg = SimConfig(n_tasks=20, strategy=strategy, timing_enabled=timing, latency=FLAT)
    res = run_campaign(cfg)
    assert res.summary["success_rate"] == 1.0
    assert all(r.consensus.support_count == 21 and r.benefit == 21 for r in res.records)


def test_summary_bounds_and_count():
    res = run_campaign(SimConfig(n_tasks=60, strategy="mode"))
    assert len(res.records) == 60
    assert 0.0 <= res.summary["success_rate"] <= 1.0


def test_determinism_and_seed_sensitivity():
    cfg = SimConfig(n_tasks=30, master_seed=11)
    d1 = records_digest(run_campaign(cfg).records)
    assert d1 == records_digest(run_campaign(cfg).records)
    assert d1 != records_digest(run_campaign(cfg.with_(master_seed=12)).records)


def test_observer_does_not_perturb():
    cfg = SimConfig(n_tasks=25)
    seen = []
    with_obs = run_campaign(cfg, observers=[lambda rec, st: seen.append(st.beliefs.sum())])
    assert len(seen) == 25
    assert records_digest(with_obs.records) == records_digest(run_campaign(cfg).records)


def test_node_streams_are_independent_of_node_count():
    small = run_campaign(SimConfig(n_nodes=5, threshold=3, n_tasks=4, strategy="median", timing_enabled=False))
    big = run_campaign(SimConfig(n_nodes=9, threshold=5, n_tasks=4, strategy="median", timing_enabled=False))
    # SeedSequence children are prefix-stable, so shared nodes draw the same latencies
    for a, b in zip(small.records, big.records):
        assert np.array_equal(a.latency_s, b.latency_s[:5])


def test_per_request_latencies_are_fresh():
    cfg = SimConfig(n_tasks=2, timing_enabled=False, latency=LatencyModel(persistence="request"))
    r = run_campaign(cfg).records
    assert not np.allclose(r[0].latency_s, r[1].latency_s, atol=0.1)


def test_per_link_latencies_differ_only_by_perturbation():
    cfg = SimConfig(n_tasks=2, timing_enabled=False)
    r = run_campaign(cfg).records
    assert np.all(np.abs(r[0].latency_s - r[1].latency_s) <= 0.1)


@pytest.mark.parametrize("kw", [
    {"threshold": 0}, {"threshold": 22}, {"m_sources": 0}, {"n_tasks": 0},
    {"strategy": "mean"}, {"frequency_hz": -1.0}, {"convergence_window": 0},
])
def test_invalid_config(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


def test_detect_convergence_examples():
    constant = [0] * 40
    alternating = [i % 2 for i in range(40)]
    late = [i % 3 for i in range(30)] + [7] * 25
    assert detect_convergence([constant, alternating, late], 20) == [0, None, 30]
    assert detect_convergence([[1, 1, 2]], 1) == [0]
    assert detect_convergence([[1] * 19], 20) == [None]


def test_rolling_mean_oracle(rng):
    flags = rng.integers(0, 2, size=300)
    out = rolling_mean(flags, 50)
    for i in (0, 10, 49, 50, 299):
        assert out[i] == pytest.approx(flags[max(0, i - 49): i + 1].mean())


# --- batched updates must agree with the per-node reference functions -------

def _random_round(rng, n=6, m=4, k=5):
    epochs = rng.integers(0, 3, size=(n, m))
    values = [[DataValue(0, int(e)) for e in row] for row in epochs]
    reps = [values[i][int(rng.integers(m))] for i in range(n)]
    star = reps[0] if rng.random() < 0.5 else None
    return epochs, values, reps, star


def test_batch_paths_match_reference(rng):
    n, m, k, t = 6, 4, 5, 3
    for _ in range(20):
        epochs, values, reps, star = _random_round(rng, n, m, k)
        beliefs = rng.random((n, n, m))
        timing = rng.normal(size=(n, n, m, k))
        slots = batch_choose_slots(timing)
        val_codes = _value_codes(np.zeros_like(epochs), epochs)
        rep_codes = np.array([r.epoch_index for r in reps])
        new_b = batch_repag_update(beliefs, rep_codes, val_codes, agg.reinforcement(reps, star))
        new_t = batch_timopt_update(timing, slots, rep_codes, val_codes,
                                    tim.timing_adjustment(reps, star, t))
        cols = batch_repag_select(beliefs)
        for i in range(n):
            assert cols[i] == agg.repag_select(values[i], beliefs[i], i).chosen_source_index
            for j in range(m):
                assert slots[i, j] == tim.choose_wait(timing[i], j, i, tim.WaitStrategySpace(1.0, k))[0]
            assert np.allclose(new_b[i], agg.repag_update(beliefs[i], values[i], reps, star, i))
            assert np.allclose(new_t[i], tim.timopt_update(timing[i], slots[i], values[i], reps, star, t, i))


def test_match_excludes_self():
    codes = np.array([1, 1, 2])
    vals = np.array([[1], [1], [2]])
    match = _others_match(codes, vals)
    assert not match[0, 0, 0] and match[0, 1, 0] and match[2, 2, 0] == False  # noqa: E712
