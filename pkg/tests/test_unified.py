import numpy as np
import pytest

from ifdma.allocation import RequestProfile, allocate, allocate_composite, stream_for_subcarriers
from ifdma.conventional import ChannelModel, rx_conventional, tx_aggregate
from ifdma.spectral import DecompositionPlan, MultiplyCounter, fft
from ifdma.unified import (
    ScheduleError,
    SwitchElement,
    SwitchState,
    build_schedule,
    prop2_inputs,
    trace_block_inputs,
    unified_detect,
    unified_detect_nofde,
    unified_multiplex,
    unified_receive,
)
from ifdma.verify import random_instance

from conftest import cvec

PLAN8 = DecompositionPlan.radix2(3)


@pytest.fixture
def fig6():
    return [stream_for_subcarriers(n, s, PLAN8) for n, s in (("A", (1, 3, 5, 7)), ("B", (0, 4)), ("C", (6,)))]


def test_prop2_examples():
    assert prop2_inputs(3, 1, 1) == [1, 3, 5, 7]
    assert prop2_inputs(3, 2, 2) == [1, 5]
    assert prop2_inputs(3, 0, 0) == list(range(8))
    with pytest.raises(ValueError):
        prop2_inputs(3, 4, 0)
    with pytest.raises(ValueError):
        prop2_inputs(3, 1, 2)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_prop2_matches_trace(m):
    plan = DecompositionPlan.radix2(m)
    for t in range(m + 1):
        for dp in range(1 << t):
            assert trace_block_inputs(plan, t, dp) == prop2_inputs(m, t, dp)


def test_switch_semantics():
    tailored = SwitchElement(SwitchState.EXIT, tailored=True)
    assert tailored.route(3, 0) == (3, 3)
    strict = SwitchElement(SwitchState.EXIT, tailored=False)
    assert strict.route(3, 0) == (0, 3)
    assert SwitchElement().route(3, 5) == (3, 5)


def test_fig6_schedule(fig6):
    fde = build_schedule(fig6, PLAN8, "with-fde")
    assert fde.exit_stage == (1, 1, -1, 0, 2, 2, 2, 2)
    assert fde.owner[2] is None
    nofde = build_schedule(fig6, PLAN8, "no-fde")
    assert {a.node_id: nofde.stream_stage(a) for a in fig6} == {"A": 1, "B": 2, "C": 3}
    assert fde.switch_count == 8 * 4
    assert fde.switch_states().sum() == 7
    assert build_schedule(fig6, PLAN8, "transmit").direction == "multiplexer"


def test_overlap_rejected(fig6):
    with pytest.raises(ScheduleError):
        build_schedule(fig6 + [fig6[2]], PLAN8)


def test_fig6_round_trip(rng, fig6):
    blocks = {a.node_id: cvec(rng, a.size) for a in fig6}
    y = unified_multiplex(blocks, build_schedule(fig6, PLAN8, "transmit"))
    np.testing.assert_allclose(y, tx_aggregate(blocks, fig6, 8), atol=1e-12)
    ref = rx_conventional(y, fig6)
    for got in (unified_detect(fft(y), build_schedule(fig6, PLAN8)),
                unified_detect_nofde(y, build_schedule(fig6, PLAN8, "no-fde"))):
        for k in blocks:
            np.testing.assert_allclose(got[k], ref[k], atol=1e-12)
            np.testing.assert_allclose(got[k], blocks[k], atol=1e-12)


def test_full_stream_is_plain_transform(rng):
    a = allocate(RequestProfile([("x", 16)], m=4))
    X = cvec(rng, 16)
    got = unified_detect(X, build_schedule(a, 4))["x"]
    np.testing.assert_allclose(got, fft(X, inverse=True), atol=1e-12)
    y = cvec(rng, 16)
    assert np.array_equal(unified_detect_nofde(y, build_schedule(a, 4, "no-fde"))["x"], y)
    # a full-band IFDMA stream is the symbol block itself
    np.testing.assert_allclose(unified_multiplex({"x": y}, build_schedule(a, 4, "transmit")), y, atol=1e-12)


def test_single_subcarrier_streams_are_permuted_inputs(rng):
    allocs = allocate(RequestProfile([(i, 1) for i in range(8)], m=3))
    X = cvec(rng, 8)
    got = unified_detect(X, build_schedule(allocs, 3))
    for a in allocs:
        assert got[a.node_id][0] == X[a.subcarriers[0]]


def test_size_one_nofde_is_dft_bin(rng):
    allocs = allocate(RequestProfile([("a", 4), ("b", 2), ("c", 1)], m=3))
    y = cvec(rng, 8)
    got = unified_detect_nofde(y, build_schedule(allocs, 3, "no-fde"))
    c = next(a for a in allocs if a.node_id == "c")
    np.testing.assert_allclose(got["c"][0], fft(y)[c.subcarriers[0]], atol=1e-12)


def test_multi_partition_superposition(rng):
    allocs = allocate(RequestProfile([("u", 5)], m=3))
    assert sorted(a.size for a in allocs) == [1, 4]
    x = cvec(rng, 5)
    y = unified_multiplex({"u": x}, build_schedule(allocs, 3, "transmit"))
    big, small = sorted(allocs, key=lambda a: -a.size)
    from ifdma.conventional import tx_time_domain
    np.testing.assert_allclose(y, tx_time_domain(x[:4], 8, big.d) + tx_time_domain(x[4:], 8, small.d), atol=1e-12)


def test_missing_block_raises(fig6):
    with pytest.raises(KeyError):
        unified_multiplex({"A": np.ones(4)}, build_schedule(fig6, PLAN8, "transmit"))


def test_wrong_length_or_variant(fig6):
    with pytest.raises(ScheduleError):
        unified_detect(np.ones(16), build_schedule(fig6, PLAN8))
    with pytest.raises(ScheduleError):
        unified_detect(np.ones(8), build_schedule(fig6, PLAN8, "no-fde"))


def test_duality_and_cancellation(rng):
    for _ in range(50):
        m = int(rng.integers(1, 6))
        allocs, blocks = random_instance(rng, m, batch=2)
        y = unified_multiplex(blocks, build_schedule(allocs, m, "transmit"))
        a = unified_detect(fft(y), build_schedule(allocs, m))
        b = unified_detect_nofde(y, build_schedule(allocs, m, "no-fde"))
        for k in blocks:
            np.testing.assert_allclose(a[k], blocks[k], atol=1e-9)
            np.testing.assert_allclose(b[k], a[k], atol=1e-9)


def test_contamination_bit_identical(rng):
    for _ in range(200):
        m = int(rng.integers(1, 6))
        allocs, blocks = random_instance(rng, m)
        X = fft(tx_aggregate(blocks, allocs, 1 << m)) + cvec(rng, 1 << m)  # junk on unused lines too
        sched = build_schedule(allocs, m)
        loose, strict = unified_detect(X, sched, tailored=True), unified_detect(X, sched, tailored=False)
        y = fft(X, inverse=True)
        sched2 = build_schedule(allocs, m, "no-fde")
        loose2, strict2 = unified_detect_nofde(y, sched2, True), unified_detect_nofde(y, sched2, False)
        for k in blocks:
            assert np.array_equal(loose[k], strict[k])
            assert np.array_equal(loose2[k], strict2[k])


def test_receive_with_channel(rng):
    allocs = allocate(RequestProfile([("u", 6), ("v", 9)], m=4))
    blocks = {"u": cvec(rng, 6), "v": cvec(rng, 9)}
    ch = ChannelModel((1.0, -0.3, 0.2j))
    y = ch.apply(unified_multiplex(blocks, build_schedule(allocs, 4, "transmit")))
    got = unified_receive(y, build_schedule(allocs, 4), ch)
    for k in blocks:
        np.testing.assert_allclose(got[k], blocks[k], atol=1e-9)


def test_composite_fig12(rng):
    plan = DecompositionPlan((2, 3, 2))
    allocs = allocate_composite(RequestProfile([("A", 6), ("B", 2), ("C", 1)], plan), order="ascending")
    blocks = {a.node_id: cvec(rng, a.size) for a in allocs}
    y = unified_multiplex(blocks, build_schedule(allocs, plan, "transmit"))
    np.testing.assert_allclose(y, tx_aggregate(blocks, allocs, 12), atol=1e-12)
    got = unified_detect(fft(y, plan), build_schedule(allocs, plan))
    for k in blocks:
        np.testing.assert_allclose(got[k], blocks[k], atol=1e-12)


def test_multiply_count_of_unified_transform(rng):
    allocs = allocate(RequestProfile([("x", 1024)], m=10))
    c = MultiplyCounter()
    unified_multiplex({"x": cvec(rng, 1024)}, build_schedule(allocs, 10, "transmit"), counter=c)
    assert c.count == 512 * 10
