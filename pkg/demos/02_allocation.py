"""Subcarrier allocation through bins and bit reversal.

Run: python3 demos/02_allocation.py
"""
# %%
from ifdma.allocation import RequestProfile, allocate, allocate_composite, group_by_node, minimal_partition
from ifdma.spectral import DecompositionPlan


def show(allocs):
    for a in allocs:
        print(f"  node {a.node_id}: bins {a.bins.start}-{a.bins.stop - 1} -> subcarriers {list(a.subcarriers)}"
              f" (d={a.d}, spacing {a.spacing})")


# %% Three nodes on M=8 asking for 2, 1 and 4 subcarriers.
print("M=8, A:2 B:1 C:4")
show(allocate(RequestProfile([("A", 2), ("B", 1), ("C", 4)], m=3)))

# %% A request that is not a power of two becomes several streams.
print("\nminimal partitions:", {n: minimal_partition(n) for n in (6, 7, 65, 127)})
allocs = allocate(RequestProfile([("u", 6), ("v", 7), ("w", 3)], m=4))
show(allocs)
for node in group_by_node(allocs):
    print(f"  node {node.node_id} holds {node.size} subcarriers in {len(node.streams)} stream(s)")

# %% Composite M uses digit reversal; only prefix-product sizes are admissible.
plan = DecompositionPlan((2, 3, 2))
print("\nM=12 plan (2,3,2), admissible sizes", plan.admissible_sizes())
show(allocate_composite(RequestProfile([("A", 6), ("B", 2), ("C", 1)], plan), order="ascending"))
