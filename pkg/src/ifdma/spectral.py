"""Cooley-Tukey transform engine with addressable butterfly stages.

Every transform here works on the last axis of a complex array, so a batch of
vectors can be pushed through in one call.  The inverse transform carries the
full ``1/M`` factor, spread as ``1/f`` over the stage that combines ``f``
sub-transforms; the forward transform is unscaled.

The canonical layout is decimation in time with an explicit front
permutation::

    ifft(X) = S_R ... S_2 S_1 P_0 X

``P_0`` is the digit-reversal permutation of the plan and ``S_s`` is the
``s``-th butterfly stage.  After stage ``s`` the lines are grouped into
contiguous blocks whose size is the product of the last ``s`` plan factors,
and each block holds a complete smaller transform of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

__all__ = [
    "DecompositionPlan",
    "StageView",
    "MultiplyCounter",
    "prime_factors",
    "enumerate_plans",
    "dft_naive",
    "bit_reverse_index",
    "digit_reverse_index",
    "digit_reversal_permutation",
    "mod_shuffle",
    "shuffle_permutation",
    "fft",
    "fft_reflected",
    "stage_apply",
    "stage_undo",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def prime_factors(n: int) -> list[int]:
    """Prime factors of ``n`` in ascending order, with multiplicity."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class StageView:
    """Block structure of the line array after ``stage_index`` butterfly stages."""

    stage_index: int
    block_size: int
    block_count: int


@dataclass(frozen=True)
class DecompositionPlan:
    """One Cooley-Tukey recursion order for an ``M``-point transform.

    ``factors[0]`` is the radix of the outermost split (the first mod-shuffle
    applied to the input), ``factors[-1]`` the innermost one, which is also
    the radix of butterfly stage 1.
    """

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(f) for f in self.factors)
        bad = [f for f in factors if not _is_prime(f)]
        if bad:
            raise ValueError(f"plan factors must be primes >= 2, got {bad}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def radix2(cls, m: int) -> DecompositionPlan:
        if m < 0:
            raise ValueError("m must be non-negative")
        return cls((2,) * m)

    @classmethod
    def for_size(cls, M: int, order: Sequence[int] | None = None) -> DecompositionPlan:
        """Plan for ``M`` points; ascending prime order unless ``order`` is given."""
        if order is None:
            return cls(tuple(prime_factors(M)))
        plan = cls(tuple(order))
        if plan.m_total != M:
            raise ValueError(f"order {tuple(order)} multiplies to {plan.m_total}, not {M}")
        return plan

    @property
    def m_total(self) -> int:
        return math.prod(self.factors)

    @property
    def stage_count(self) -> int:
        return len(self.factors)

    @property
    def is_radix2(self) -> bool:
        return all(f == 2 for f in self.factors)

    def reversed(self) -> DecompositionPlan:
        return DecompositionPlan(self.factors[::-1])

    def block_size(self, stage: int) -> int:
        """Size of each embedded sub-transform once ``stage`` stages have run."""
        if not 0 <= stage <= self.stage_count:
            raise ValueError(f"stage {stage} outside [0, {self.stage_count}]")
        return math.prod(self.factors[self.stage_count - stage:])

    def stage_view(self, stage: int) -> StageView:
        size = self.block_size(stage)
        return StageView(stage, size, self.m_total // size)

    def admissible_sizes(self) -> list[int]:
        """Single-stream sizes this plan can carry, largest first."""
        return [self.block_size(s) for s in range(self.stage_count, -1, -1)]

    def stage_for_size(self, size: int) -> int:
        """Stage after which blocks have exactly ``size`` lines."""
        for s in range(self.stage_count + 1):
            if self.block_size(s) == size:
                return s
        raise ValueError(
            f"size {size} is not admissible under plan {self.factors}; "
            f"admissible sizes are {self.admissible_sizes()}"
        )


def enumerate_plans(M: int) -> list[DecompositionPlan]:
    """All distinct recursion orders for ``M`` (a multinomial count of them)."""
    orders = sorted(set(permutations(prime_factors(M))))
    return [DecompositionPlan(o) for o in orders]


class MultiplyCounter:
    """Tally of complex twiddle multiplications performed by butterfly stages."""

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)


def _as_complex(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        raise ValueError("expected a vector, got a scalar")
    return arr


def dft_naive(x, inverse: bool = False) -> np.ndarray:
    """Direct O(M^2) DFT, kept independent of the fast path as a test oracle."""
    x = _as_complex(x)
    M = x.shape[-1]
    if M < 1:
        raise ValueError("dft_naive needs at least one sample")
    k = np.arange(M)
    # reduce k*n mod M before scaling so large products keep full precision
    phase = (np.outer(k, k) % M) / M
    sign = 1.0 if inverse else -1.0
    W = np.exp(sign * 2j * np.pi * phase)
    out = x @ W.T
    if inverse:
        out = out / M
    return out


def bit_reverse_index(i: int, m: int) -> int:
    if m < 0 or not 0 <= i < (1 << m):
        raise ValueError(f"index {i} out of range for {m} bits")
    out = 0
    for _ in range(m):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def digit_reverse_index(i: int, plan: DecompositionPlan) -> int:
    """Map bin (line) ``i`` to the subcarrier it carries after the front permutation.

    ``i`` is read as mixed-radix digits with the ``factors[0]`` digit most
    significant; the same digits are then read back with the ``factors[0]``
    digit least significant.
    """
    M = plan.m_total
    if not 0 <= i < M:
        raise ValueError(f"index {i} out of range for M={M}")
    digits = []
    for f in reversed(plan.factors):
        digits.append(i % f)
        i //= f
    digits.reverse()
    out = 0
    weight = 1
    for d, f in zip(digits, plan.factors):
        out += d * weight
        weight *= f
    return out


@lru_cache(maxsize=None)
def _perm_cached(plan: DecompositionPlan) -> np.ndarray:
    perm = np.array([digit_reverse_index(p, plan) for p in range(plan.m_total)], dtype=np.intp)
    perm.setflags(write=False)
    return perm


def digit_reversal_permutation(plan: DecompositionPlan) -> np.ndarray:
    """``perm[p]`` is the subcarrier index that lands on line ``p``."""
    return _perm_cached(plan)


def mod_shuffle(x, radix: int) -> np.ndarray:
    """Group entries by ``index mod radix`` (stable), radix 2 being the odd-even split."""
    x = np.asarray(x)
    n = x.shape[-1]
    if radix < 1 or n % radix:
        raise ValueError(f"length {n} is not divisible by radix {radix}")
    return np.concatenate([x[..., r::radix] for r in range(radix)], axis=-1)


def shuffle_permutation(plan: DecompositionPlan) -> np.ndarray:
    """Front permutation built by cascading mod-shuffles inside ever smaller blocks."""
    lines = np.arange(plan.m_total)
    block = plan.m_total
    for f in plan.factors:
        lines = lines.reshape(-1, block)
        lines = mod_shuffle(lines, f).reshape(-1)
        block //= f
    return lines


def _twiddles(size: int, radix: int, sign: float) -> np.ndarray:
    sub = size // radix
    idx = (np.arange(radix)[:, None] * np.arange(sub)[None, :]) % size
    return np.exp(sign * 2j * np.pi * idx / size)


@lru_cache(maxsize=None)
def _stage_tables(size: int, radix: int, inverse: bool) -> tuple[np.ndarray, np.ndarray]:
    sign = 1.0 if inverse else -1.0
    tw = _twiddles(size, radix, sign)
    kern = np.exp(sign * 2j * np.pi * ((np.outer(np.arange(radix), np.arange(radix)) % radix) / radix))
    tw.setflags(write=False)
    kern.setflags(write=False)
    return tw, kern


def _check_state(state, plan: DecompositionPlan, stage: int) -> np.ndarray:
    state = _as_complex(state)
    if state.shape[-1] != plan.m_total:
        raise ValueError(f"state has {state.shape[-1]} lines, plan expects {plan.m_total}")
    if not 1 <= stage <= plan.stage_count:
        raise ValueError(f"stage {stage} outside [1, {plan.stage_count}]")
    return state


def stage_apply(state, plan: DecompositionPlan, stage: int, inverse: bool = False,
                counter: MultiplyCounter | None = None) -> np.ndarray:
    """Run butterfly stage ``stage`` (1-based) on an already permuted state."""
    state = _check_state(state, plan, stage)
    R = plan.stage_count
    size = plan.block_size(stage)
    radix = plan.factors[R - stage]
    sub = size // radix
    tw, kern = _stage_tables(size, radix, inverse)

    lead = state.shape[:-1]
    blocks = state.reshape(*lead, plan.m_total // size, radix, sub)
    # branch 0 has unit twiddles, only the others are multiplied
    weighted = blocks.copy()
    weighted[..., 1:, :] *= tw[1:]
    if counter is not None:
        counter.add(weighted[..., 1:, :].size // max(1, math.prod(lead)))

    if radix == 2:
        a = weighted[..., 0, :]
        b = weighted[..., 1, :]
        out = np.stack([a + b, a - b], axis=-2)
    else:
        out = np.einsum("ud,...dq->...uq", kern, weighted)
    if inverse:
        out = out / radix
    return out.reshape(state.shape)


def stage_undo(state, plan: DecompositionPlan, stage: int, inverse: bool = True,
               counter: MultiplyCounter | None = None) -> np.ndarray:
    """Exact inverse of ``stage_apply(..., stage, inverse)``.

    Undoing the stages of the inverse transform in reverse order is a
    decimation-in-frequency forward transform.
    """
    state = _check_state(state, plan, stage)
    R = plan.stage_count
    size = plan.block_size(stage)
    radix = plan.factors[R - stage]
    sub = size // radix
    tw, kern = _stage_tables(size, radix, inverse)

    lead = state.shape[:-1]
    blocks = state.reshape(*lead, plan.m_total // size, radix, sub)
    if radix == 2:
        a = blocks[..., 0, :]
        b = blocks[..., 1, :]
        mixed = np.stack([a + b, a - b], axis=-2)
    else:
        mixed = np.einsum("ud,...dq->...uq", kern.conj(), blocks)
    if not inverse:
        mixed = mixed / radix
    mixed[..., 1:, :] *= tw[1:].conj()
    if counter is not None:
        counter.add(mixed[..., 1:, :].size // max(1, math.prod(lead)))
    return mixed.reshape(state.shape)


def _resolve_plan(x: np.ndarray, plan: DecompositionPlan | None) -> DecompositionPlan:
    M = x.shape[-1]
    if plan is None:
        if M < 1:
            raise ValueError("empty input")
        return DecompositionPlan.for_size(M)
    if plan.m_total != M:
        raise ValueError(f"input length {M} does not match plan size {plan.m_total}")
    return plan


def fft(x, plan: DecompositionPlan | None = None, inverse: bool = False,
        counter: MultiplyCounter | None = None) -> np.ndarray:
    """Decimation-in-time transform: front permutation then stages 1..R."""
    x = _as_complex(x)
    plan = _resolve_plan(x, plan)
    state = x[..., digit_reversal_permutation(plan)]
    for s in range(1, plan.stage_count + 1):
        state = stage_apply(state, plan, s, inverse=inverse, counter=counter)
    return state


def fft_reflected(x, plan: DecompositionPlan | None = None, inverse: bool = False,
                  counter: MultiplyCounter | None = None) -> np.ndarray:
    """Mirror image of :func:`fft`: undo stages R..1, then the inverse permutation.

    ``fft_reflected(x, inverse=False)`` undoes the inverse transform and is
    therefore the forward DFT, and vice versa.
    """
    x = _as_complex(x)
    plan = _resolve_plan(x, plan)
    state = x
    for s in range(plan.stage_count, 0, -1):
        state = stage_undo(state, plan, s, inverse=not inverse, counter=counter)
    out = np.empty_like(state)
    out[..., digit_reversal_permutation(plan)] = state
    return out
