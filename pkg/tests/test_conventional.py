import numpy as np
import pytest

from ifdma.allocation import RequestProfile, allocate
from ifdma.conventional import (
    ChannelModel,
    rx_conventional,
    split_node_block,
    tx_aggregate,
    tx_freq_domain,
    tx_time_domain,
)

from conftest import cvec


def test_node_a_example(rng):
    x = cvec(rng, 8)
    ell = np.arange(16)
    np.testing.assert_allclose(tx_time_domain(x, 16, 0), 0.5 * x[ell % 8])


def test_node_b_example(rng):
    x = cvec(rng, 4)
    ell = np.arange(16)
    np.testing.assert_allclose(tx_time_domain(x, 16, 1), 0.25 * np.exp(2j * np.pi * ell / 16) * x[ell % 4])


def test_full_band_is_identity(rng):
    x = cvec(rng, 8)
    np.testing.assert_allclose(tx_time_domain(x, 8, 0), x)


def test_time_domain_errors():
    with pytest.raises(ValueError):
        tx_time_domain(np.ones(3), 8, 0)
    with pytest.raises(ValueError):
        tx_time_domain(np.ones(4), 8, 2)


def test_constant_modulus(rng):
    x = np.exp(2j * np.pi * rng.random(4))
    assert np.allclose(np.abs(tx_time_domain(x, 16, 3)), 4 / 16)


def test_freq_matches_time(rng):
    for a in allocate(RequestProfile([("a", 4), ("b", 2), ("c", 1), ("d", 1)], m=4)):
        x = cvec(rng, 3, a.size)
        np.testing.assert_allclose(tx_freq_domain(x, a, 16), tx_time_domain(x, 16, a.d), atol=1e-12)


def test_freq_zero_block():
    a = allocate(RequestProfile([("a", 2)], m=3))[0]
    assert np.all(tx_freq_domain(np.zeros(2), a, 8) == 0)


def test_flat_spectrum_gives_impulse_train():
    a = allocate(RequestProfile([("a", 4)], m=3))[0]
    # an impulse block puts ones on subcarriers {0, 2, 4, 6}
    y = tx_freq_domain(np.array([1, 0, 0, 0]), a, 8)
    np.testing.assert_allclose(y, 0.5 * np.array([1, 0, 0, 0, 1, 0, 0, 0]), atol=1e-12)
    np.testing.assert_allclose(tx_freq_domain(np.ones(4), a, 8), np.full(8, 0.5), atol=1e-12)


def test_freq_block_mismatch():
    a = allocate(RequestProfile([("a", 2)], m=3))[0]
    with pytest.raises(ValueError):
        tx_freq_domain(np.ones(3), a, 8)


def test_split_largest_first():
    allocs = allocate(RequestProfile([("a", 7)], m=3))
    pieces = split_node_block(np.arange(7), allocs)
    assert [p.tolist() for p in pieces] == [[0, 1, 2, 3], [4, 5], [6]]


def test_round_trip_mixed_sizes(rng):
    allocs = allocate(RequestProfile([("C", 4), ("A", 2), ("B", 1)], m=3))
    blocks = {"A": cvec(rng, 2), "B": cvec(rng, 1), "C": cvec(rng, 4)}
    got = rx_conventional(tx_aggregate(blocks, allocs, 8), allocs)
    for k in blocks:
        np.testing.assert_allclose(got[k], blocks[k], atol=1e-12)


def test_two_tap_channel_zf(rng):
    allocs = allocate(RequestProfile([("u", 11), ("v", 5)], m=4))
    blocks = {"u": cvec(rng, 11), "v": cvec(rng, 5)}
    ch = ChannelModel((1.0, 0.5))
    got = rx_conventional(ch.apply(tx_aggregate(blocks, allocs, 16)), allocs, ch)
    for k in blocks:
        np.testing.assert_allclose(got[k], blocks[k], atol=1e-9)


def test_dead_subcarrier_named():
    allocs = allocate(RequestProfile([("u", 8)], m=3))
    ch = ChannelModel((1.0, 1.0))  # null at subcarrier 4
    with pytest.raises(ZeroDivisionError, match="4"):
        rx_conventional(np.ones(8), allocs, ch)
