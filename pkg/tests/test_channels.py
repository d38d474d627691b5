import numpy as np
import pytest

from twrsim import NetworkConfig, TrialRng, gain_power, generate_channels
from twrsim.model import ChannelRealization

from oracles import ks_statistic


def _cfg(k=2, n=10, seed=123):
    return NetworkConfig(k=k, n=n, snr_db=10.0, seed=seed)


def test_same_trial_is_bit_identical():
    cfg = _cfg()
    a = generate_channels(cfg, 5)
    b = generate_channels(cfg, 5)
    assert np.array_equal(a.gains, b.gains)
    assert a.seed_tag == 5


def test_distinct_trials_and_seeds_differ():
    cfg = _cfg()
    a = generate_channels(cfg, 0)
    b = generate_channels(cfg, 1)
    c = generate_channels(_cfg(seed=124), 0)
    assert not np.array_equal(a.gains, b.gains)
    assert not np.array_equal(a.gains, c.gains)


def test_shape_and_dtype():
    c = generate_channels(_cfg(k=3, n=7), 0)
    assert c.gains.shape == (2, 3, 7)
    assert c.gains.dtype == np.complex128
    assert np.all(np.isfinite(c.gains.view(np.float64)))


def test_trial_rng_streams_are_reproducible_and_distinct():
    rng = TrialRng(9, 4)
    a = rng.generator(0).standard_normal(8)
    b = rng.generator(0).standard_normal(8)
    c = rng.generator(1).standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def _million_powers():
    # 100 trials of a 2x50x100 network: 1e6 coefficients
    cfg = _cfg(k=50, n=100, seed=2024)
    powers = [np.abs(generate_channels(cfg, t).gains) ** 2 for t in range(100)]
    return np.concatenate([p.ravel() for p in powers])


def test_unit_mean_power_over_a_million_samples():
    p = _million_powers()
    assert p.size == 1_000_000
    assert 0.995 <= p.mean() <= 1.005


def test_power_is_exponential_ks():
    p = _million_powers()
    stat = ks_statistic(p, lambda x: 1.0 - np.exp(-x))
    assert stat < 0.005


def test_component_moments():
    cfg = _cfg(k=50, n=100, seed=77)
    gains = np.concatenate(
        [generate_channels(cfg, t).gains.ravel() for t in range(50)]
    )
    assert abs(gains.real.mean()) < 0.005
    assert abs(gains.imag.mean()) < 0.005
    # each component carries half the unit power
    assert abs((gains.real**2).mean() - 0.5) < 0.005
    assert abs((gains.imag**2).mean() - 0.5) < 0.005


def test_entries_uncorrelated_across_trials():
    cfg = _cfg(k=1, n=2, seed=5)
    draws = np.stack([generate_channels(cfg, t).gains.ravel() for t in range(100_000)])
    powers = np.abs(draws) ** 2
    corr = np.corrcoef(powers, rowvar=False)
    off_diag = corr[~np.eye(corr.shape[0], dtype=bool)]
    assert np.max(np.abs(off_diag)) < 0.01


def test_gain_power_values():
    gains = np.zeros((2, 2, 3), dtype=complex)
    gains[0, 1, 2] = 3 + 4j
    gains[1, 0, 1] = 1 - 1j
    c = ChannelRealization(gains=gains)
    assert gain_power(c, 0, 1, 2) == pytest.approx(25.0)
    assert gain_power(c, 1, 0, 1) == pytest.approx(2.0)
    assert gain_power(c, 0, 0, 0) == 0.0


@pytest.mark.parametrize("index", [(2, 0, 0), (0, 2, 0), (0, 0, 3), (-1, 0, 0)])
def test_gain_power_rejects_out_of_range(index):
    c = ChannelRealization(gains=np.zeros((2, 2, 3), dtype=complex))
    with pytest.raises(IndexError):
        gain_power(c, *index)
