import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracle_lab.errors import ConfigError, DomainError
from oracle_lab.signal import INDEPENDENT, DataValue, SignalModel, sample


def model(**kw):
    kw.setdefault("frequency_hz", 5.0)
    kw.setdefault("n_sources", 5)
    return SignalModel(**kw)


@pytest.mark.parametrize("t, epoch", [(0.0, 0), (0.43, 2), (0.2, 1)])
def test_sample_examples(t, epoch):
    assert sample(model(), 0, t) == DataValue(0, epoch)


def test_boundary_belongs_to_later_interval():
    m = model()
    assert sample(m, 0, 0.4).epoch_index == 2
    assert sample(m, 0, 0.3999999).epoch_index == 1


def test_errors():
    with pytest.raises(ConfigError):
        sample(model(), 5, 1.0)
    with pytest.raises(ConfigError):
        sample(model(), -1, 1.0)
    with pytest.raises(DomainError):
        sample(model(origin_time=1.0), 0, 0.5)
    with pytest.raises(DomainError):
        sample(model(phase_offsets=(0.1, 0, 0, 0, 0)), 0, 0.05)


@pytest.mark.parametrize("kw", [
    {"frequency_hz": 0},
    {"phase_offsets": (0.0, 0.0)},
    {"phase_offsets": (0.2, 0, 0, 0, 0)},
    {"mode": "bogus"},
])
def test_invalid_models(kw):
    with pytest.raises(ConfigError):
        model(**kw)


def test_independent_streams_never_coincide():
    m = model(mode=INDEPENDENT)
    assert sample(m, 1, 0.3) != sample(m, 2, 0.3)
    assert sample(m, 3, 0.3) == DataValue(3, 1)


times = st.floats(min_value=0.0, max_value=1e4, allow_nan=False)
freqs = st.floats(min_value=0.1, max_value=50.0)


@given(freqs, times, times)
def test_equal_iff_same_interval(f, t1, t2):
    m = model(frequency_hz=f)
    same = math.floor(t1 * f) == math.floor(t2 * f)
    assert (sample(m, 0, t1) == sample(m, 0, t2)) == same


@given(freqs, times, times)
def test_monotone_in_time(f, t1, t2):
    m = model(frequency_hz=f)
    lo, hi = sorted((t1, t2))
    assert sample(m, 0, lo).epoch_index <= sample(m, 0, hi).epoch_index


@given(times, st.integers(0, 4), st.integers(0, 4))
def test_shared_mode_sources_agree(t, j1, j2):
    m = model()
    assert sample(m, j1, t) == sample(m, j2, t)
