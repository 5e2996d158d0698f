"""Transform engine: permutations, staged FFT and the naive oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifdma import spectral
from ifdma.spectral import (
    DecompositionPlan,
    MultiplyCounter,
    bit_reverse_index,
    dft_naive,
    digit_reverse_index,
    digit_reversal_permutation,
    enumerate_plans,
    fft,
    fft_reflected,
    mod_shuffle,
    shuffle_permutation,
    stage_apply,
    stage_undo,
)

from conftest import cvec


class TestNaiveDft:
    def test_impulse_is_flat(self):
        np.testing.assert_allclose(dft_naive([1, 0, 0, 0]), [1, 1, 1, 1])

    def test_constant_is_dc(self):
        np.testing.assert_allclose(dft_naive([1, 1, 1, 1]), [4, 0, 0, 0], atol=1e-12)

    def test_round_trip(self, rng):
        x = cvec(rng, 37)
        np.testing.assert_allclose(dft_naive(dft_naive(x), inverse=True), x, atol=1e-12)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            dft_naive(np.zeros(0))


class TestIndexMaps:
    def test_bit_reverse_examples(self):
        assert bit_reverse_index(6, 3) == 3
        assert bit_reverse_index(1, 6) == 32
        assert all(bit_reverse_index(0, m) == 0 for m in range(8))

    def test_bit_reverse_range(self):
        with pytest.raises(ValueError):
            bit_reverse_index(8, 3)
        with pytest.raises(ValueError):
            bit_reverse_index(-1, 3)

    def test_digit_reverse_matches_bits_for_radix2(self):
        for m in range(7):
            plan = DecompositionPlan.radix2(m)
            assert [digit_reverse_index(i, plan) for i in range(1 << m)] == \
                [bit_reverse_index(i, m) for i in range(1 << m)]

    def test_composite_plan_map(self):
        plan = DecompositionPlan((2, 3, 2))
        perm = digit_reversal_permutation(plan)
        assert perm.tolist() == [0, 6, 2, 8, 4, 10, 1, 7, 3, 9, 5, 11]
        assert digit_reverse_index(0, plan) == 0
        # two aligned bins carry the evenly spaced pair {2, 8}
        assert sorted(perm[2:4]) == [2, 8]
        with pytest.raises(ValueError):
            digit_reverse_index(12, plan)

    def test_permutation_is_read_only(self):
        perm = digit_reversal_permutation(DecompositionPlan.radix2(3))
        with pytest.raises(ValueError):
            perm[0] = 5

    def test_mod_shuffle(self):
        assert mod_shuffle(np.array(list("abcd")), 2).tolist() == list("acbd")
        assert mod_shuffle(np.arange(6), 3).tolist() == [0, 3, 1, 4, 2, 5]
        with pytest.raises(ValueError):
            mod_shuffle(np.arange(5), 2)

    def test_shuffle_cascade_is_bit_reversal(self):
        assert shuffle_permutation(DecompositionPlan.radix2(3)).tolist() == \
            [bit_reverse_index(i, 3) for i in range(8)]

    @pytest.mark.parametrize("M", [6, 12, 18, 24, 30, 36, 60])
    def test_shuffle_cascade_every_plan(self, M):
        for plan in enumerate_plans(M):
            assert np.array_equal(shuffle_permutation(plan), digit_reversal_permutation(plan))
            q = digit_reversal_permutation(plan.reversed())
            assert np.array_equal(digit_reversal_permutation(plan)[q], np.arange(M))


class TestPlan:
    def test_admissible_sizes(self):
        assert DecompositionPlan((2, 3, 2)).admissible_sizes() == [12, 6, 2, 1]

    def test_stage_for_size_names_admissible_set(self):
        with pytest.raises(ValueError, match=r"\[12, 6, 2, 1\]"):
            DecompositionPlan((2, 3, 2)).stage_for_size(4)

    def test_rejects_non_prime_factor(self):
        with pytest.raises(ValueError):
            DecompositionPlan((4, 2))

    def test_enumerate_plans_count(self):
        assert len(enumerate_plans(12)) == 3
        assert len(enumerate_plans(16)) == 1

    def test_block_sizes(self):
        plan = DecompositionPlan((2, 3, 2))
        assert [plan.block_size(s) for s in range(4)] == [1, 2, 6, 12]


class TestFft:
    @pytest.mark.parametrize("M", [1, 2, 4, 8, 16, 64, 3, 12, 15, 45, 128])
    def test_matches_naive(self, rng, M):
        x = cvec(rng, 4, M)
        for plan in enumerate_plans(M)[:4] if M > 1 else [DecompositionPlan(())]:
            for inverse in (False, True):
                ref = np.stack([dft_naive(v, inverse) for v in x])
                np.testing.assert_allclose(fft(x, plan, inverse), ref, atol=1e-10)
                np.testing.assert_allclose(fft_reflected(x, plan, inverse), ref, atol=1e-10)

    def test_impulse(self):
        np.testing.assert_allclose(fft(np.eye(8)[0]), np.ones(8))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            fft(np.ones(8), DecompositionPlan.radix2(2))

    def test_round_trip(self, rng):
        x = cvec(rng, 24)
        np.testing.assert_allclose(fft(fft(x), inverse=True), x, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from([2, 3, 5]), min_size=0, max_size=5), st.integers(0, 2 ** 32 - 1))
    def test_random_plans(self, factors, seed):
        plan = DecompositionPlan(tuple(factors))
        x = cvec(np.random.default_rng(seed), plan.m_total)
        np.testing.assert_allclose(fft(x, plan), dft_naive(x), atol=1e-9 * max(1, plan.m_total))


class TestStages:
    def test_stages_compose_to_fft(self, rng):
        plan = DecompositionPlan((3, 2, 2))
        x = cvec(rng, 12)
        state = x[digit_reversal_permutation(plan)]
        for s in range(1, plan.stage_count + 1):
            state = stage_apply(state, plan, s, inverse=True)
        np.testing.assert_allclose(state, fft(x, plan, inverse=True), atol=1e-12)

    def test_first_stage_butterfly(self, rng):
        plan = DecompositionPlan.radix2(3)
        state = cvec(rng, 8)
        out = stage_apply(state, plan, 1, inverse=True)
        a, b = state[0], state[1]
        np.testing.assert_allclose(out[:2], [(a + b) / 2, (a - b) / 2])

    def test_blocks_hold_small_transforms(self, rng):
        m = 5
        plan = DecompositionPlan.radix2(m)
        X = cvec(rng, 1 << m)
        perm = digit_reversal_permutation(plan)
        state = X[perm]
        for n in range(1, m + 1):
            state = stage_apply(state, plan, n, inverse=True)
            size = 1 << n
            for blk in range((1 << m) // size):
                subs = perm[blk * size:(blk + 1) * size]
                ref = dft_naive(X[np.sort(subs)], inverse=True)
                np.testing.assert_allclose(state[blk * size:(blk + 1) * size], ref, atol=1e-12)

    def test_undo_inverts(self, rng):
        plan = DecompositionPlan((2, 3, 5))
        x = cvec(rng, 2, 30)
        for s in (1, 2, 3):
            np.testing.assert_allclose(stage_undo(stage_apply(x, plan, s, True), plan, s, True), x, atol=1e-12)

    def test_stage_out_of_range(self):
        with pytest.raises(ValueError):
            stage_apply(np.ones(8), DecompositionPlan.radix2(3), 4)

    @pytest.mark.parametrize("m", [1, 4, 10])
    def test_multiply_count(self, m):
        c = MultiplyCounter()
        fft(np.ones(1 << m), DecompositionPlan.radix2(m), inverse=True, counter=c)
        assert c.count == (1 << m) // 2 * m

    def test_output_finite(self, rng):
        assert np.all(np.isfinite(fft(cvec(rng, 256) * 1e150)))

    def test_corrupted_twiddles_detected(self, monkeypatch):
        orig = spectral._twiddles
        monkeypatch.setattr(spectral, "_twiddles", lambda size, radix, sign: np.conj(orig(size, radix, sign)))
        spectral._stage_tables.cache_clear()
        try:
            x = np.arange(8, dtype=complex)
            assert not np.allclose(fft(x), dft_naive(x))
        finally:
            monkeypatch.undo()
            spectral._stage_tables.cache_clear()
