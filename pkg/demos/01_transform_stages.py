"""Walk through the staged Cooley-Tukey transform.

Run: python3 demos/01_transform_stages.py
"""
# %%
import numpy as np

from ifdma.spectral import (
    DecompositionPlan,
    MultiplyCounter,
    dft_naive,
    digit_reversal_permutation,
    fft,
    stage_apply,
)

# %% The front permutation of an 8-point radix-2 plan is plain bit reversal.
plan = DecompositionPlan.radix2(3)
perm = digit_reversal_permutation(plan)
print("bit-reversal permutation:", perm.tolist())

# %% Push a random spectrum through the stages one at a time.
rng = np.random.default_rng(0)
X = rng.standard_normal(8) + 1j * rng.standard_normal(8)
state = X[perm]
for s in range(1, plan.stage_count + 1):
    state = stage_apply(state, plan, s, inverse=True)
    size = plan.block_size(s)
    # every aligned block is now a complete inverse transform of its own subcarriers
    for blk in range(8 // size):
        subs = np.sort(perm[blk * size:(blk + 1) * size])
        err = np.max(np.abs(state[blk * size:(blk + 1) * size] - dft_naive(X[subs], inverse=True)))
        print(f"after stage {s}: block {blk} <- subcarriers {subs.tolist()}  err {err:.1e}")

# %% Mixed radix works the same way; the 12-point plan (2, 3, 2) has its own digit reversal.
p12 = DecompositionPlan((2, 3, 2))
print("digit reversal for (2,3,2):", digit_reversal_permutation(p12).tolist())
print("admissible stream sizes:", p12.admissible_sizes())
x = rng.standard_normal(12) + 0j
print("max |fft - naive| :", np.max(np.abs(fft(x, p12) - dft_naive(x))))

# %% Multipliers used by one 1024-point transform.
c = MultiplyCounter()
fft(np.ones(1024), DecompositionPlan.radix2(10), inverse=True, counter=c)
print("twiddle multiplies, M=1024:", c.count, "= (M/2) log2 M =", 512 * 10)
