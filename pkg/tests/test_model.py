import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twrsim import (
    ChannelRealization,
    NetworkConfig,
    Protocol,
    Selector,
    db_to_linear,
    linear_to_db,
    validate_config,
)


def test_valid_config_ok():
    out = validate_config(NetworkConfig(k=2, n=50, snr_db=20, epsilon=1, t_max=1, seed=7))
    assert out.ok
    assert out.violations == ()
    assert out.warnings == ()


def test_n_below_k_warns_but_ok():
    out = validate_config(NetworkConfig(k=2, n=1, snr_db=20, epsilon=1, t_max=1, seed=7))
    assert out.ok
    assert any("N < K" in w for w in out.warnings)


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        (dict(k=0), "K"),
        (dict(n=0), "N"),
        (dict(snr_db=math.nan), "snr_db"),
        (dict(snr_db=math.inf), "snr_db"),
        (dict(epsilon=0.0), "epsilon"),
        (dict(epsilon=-1.0), "epsilon"),
        (dict(t_max=0.0), "t_max"),
        (dict(seed=-1), "seed"),
        (dict(seed=2**64), "seed"),
    ],
)
def test_invalid_fields_rejected(kwargs, fragment):
    base = dict(k=2, n=10, snr_db=10.0, epsilon=1.0, t_max=1.0, seed=3)
    base.update(kwargs)
    out = validate_config(NetworkConfig(**base))
    assert not out.ok
    assert any(fragment in v for v in out.violations)


@given(
    k=st.integers(-3, 5),
    n=st.integers(-3, 5),
    snr_db=st.one_of(st.floats(-50, 50), st.just(math.nan)),
    epsilon=st.floats(-1, 5),
    t_max=st.floats(-1, 5),
)
def test_validation_matches_naive_predicate(k, n, snr_db, epsilon, t_max):
    cfg = NetworkConfig(k=k, n=n, snr_db=snr_db, epsilon=epsilon, t_max=t_max, seed=1)
    should_be_ok = (
        k >= 1 and n >= 1 and math.isfinite(snr_db) and epsilon > 0 and t_max > 0
    )
    assert validate_config(cfg).ok == should_be_ok


@given(snr_db=st.floats(-200, 200))
def test_snr_db_round_trip(snr_db):
    linear = db_to_linear(snr_db)
    assert linear > 0
    back = linear_to_db(linear)
    assert abs(back - snr_db) <= 1e-12 * max(1.0, abs(snr_db))


def test_config_is_immutable():
    cfg = NetworkConfig(k=2, n=4, snr_db=0.0, seed=1)
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.k = 3


def test_snr_helpers():
    cfg = NetworkConfig(k=1, n=1, snr_db=20.0, seed=0)
    assert cfg.snr_linear == pytest.approx(100.0, rel=1e-12)
    assert cfg.noise_power == pytest.approx(0.01, rel=1e-12)


def test_enums_are_exhaustive():
    assert {p.value for p in Protocol} == {"AF", "DF", "LC-CF"}
    assert {s.value for s in Selector} == {"ORS", "max-min-SNR", "random"}


def test_channel_realization_validates_shape_and_finiteness():
    with pytest.raises(ValueError):
        ChannelRealization(gains=np.zeros((3, 2, 2), dtype=complex))
    with pytest.raises(ValueError):
        ChannelRealization(gains=np.ones((2, 2)) + 0j)
    bad = np.zeros((2, 1, 1), dtype=complex)
    bad[0, 0, 0] = complex(np.inf, 0)
    with pytest.raises(ValueError):
        ChannelRealization(gains=bad)
    ok = ChannelRealization(gains=np.zeros((2, 3, 4), dtype=complex))
    assert ok.k == 3
    assert ok.n == 4
