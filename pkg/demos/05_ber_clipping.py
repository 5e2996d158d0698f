"""Clipping at alpha=2 on M=128 and its effect on PAPR and BER.

Run: python3 demos/05_ber_clipping.py
"""
# %%
import numpy as np

from ifdma.waveform import SCHEMES, ExperimentConfig, papr_at_probability, qpsk_ber_theory, run_ber, run_ccdf

base = ExperimentConfig(M=128, samples_per_ofdm_symbol_with_cp=160, clipping_alpha=2.0, packets=1000,
                        chunk_packets=100)

# %% N=65 is two streams (64 + 1) for Multi-IFDMA: its peaks stay under the clipping level.
for N in (65, 127):
    for s in SCHEMES:
        plain, clipped = run_ccdf(base.replace(N=N, scheme=s))
        print(f"N={N:3d} {s:12s} PAPR {papr_at_probability(plain):5.2f} -> {papr_at_probability(clipped):5.2f} dB,"
              f" {clipped.clipped_samples} samples clipped")

# %% BER with and without clipping; the same symbols and noise feed both curves.
cfg = base.replace(N=127, stream_power="per_subcarrier", snr_db_grid=(0.0, 4.0, 8.0), max_packets=1000,
                   chunk_packets=50)
print("\ntheory:", np.round(qpsk_ber_theory(cfg.snr_db_grid), 6))
for s in SCHEMES:
    plain, clipped = run_ber(cfg.replace(scheme=s))
    print(f"{s:12s} plain {np.round(plain.ber, 6)}  clipped {np.round(clipped.ber, 6)}")
