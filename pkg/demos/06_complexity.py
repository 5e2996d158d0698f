"""Multiplier counts of conventional and unified transceivers.

Run: python3 demos/06_complexity.py
"""
# %%
from ifdma.complexity import Scenario, compare, count, render_table

# %% Formula tables with exact numbers at M=64.
for t in (1, 3, 4, 5):
    print(render_table(t, M=64))

# %% How the savings grow with M for the Multi-IFDMA downlink.
for r in compare([16, 64, 256, 1024, 4096]):
    if r.system == "Multi" and r.link == "DL":
        print(f"M={r.M:5d} {r.unified_role:17s} conventional {r.conventional:8d} unified {r.unified:6d}"
              f" ratio {r.ratio:5.2f}  log2(M)/3 {r.bound:4.2f}")

# %% Closed form against exact sum for the bank of small transforms.
r = count(Scenario("Multi", "DL", "TX-freq"), 1024)
print(f"\nM=1024 bank: exact {r.exact_multipliers}, tabulated {r.approx_formula} = {r.approx_formula_value:.0f}")
