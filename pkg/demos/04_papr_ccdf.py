"""PAPR of Multi-IFDMA against LFDMA and OFDMA at M=16.

Run: python3 demos/04_papr_ccdf.py [packets]
The full 10,000-packet protocol is what `ifdma papr` runs by default.
"""
# %%
import sys

from ifdma.waveform import SCHEMES, ExperimentConfig, papr_at_probability, run_ccdf

packets = int(sys.argv[1]) if len(sys.argv) > 1 else 2000

# %% 99.9th percentile PAPR per scheme and load.
print(f"{'N':>3} " + " ".join(f"{s:>12}" for s in SCHEMES) + "   gain/LFDMA  gain/OFDMA")
for N in (4, 5, 7, 8, 9, 15):
    q = {s: papr_at_probability(run_ccdf(ExperimentConfig(N=N, scheme=s, packets=packets))[0]) for s in SCHEMES}
    print(f"{N:>3} " + " ".join(f"{q[s]:12.2f}" for s in SCHEMES)
          + f"   {q['lfdma'] - q['multi_ifdma']:10.2f}  {q['ofdma'] - q['multi_ifdma']:10.2f}")

# %% Equal energy per subcarrier changes the Multi-IFDMA picture for uneven partitions.
for N in (5, 7):
    c = ExperimentConfig(N=N, packets=packets, stream_power="per_subcarrier")
    print(f"N={N} per-subcarrier power: {papr_at_probability(run_ccdf(c)[0]):.2f} dB")
