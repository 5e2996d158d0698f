"""Subcarrier allocation by contiguous bins and bit/digit reversal.

Streams are first given contiguous, size-aligned runs of *bins* (the lines
at the output of the transform's front permutation).  Reversing the bin
indices then yields the subcarriers, which come out evenly spaced for free.
Requests that are not a single admissible size are split into several
streams (Multi-IFDMA) using the binary expansion of the request.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .spectral import DecompositionPlan, bit_reverse_index, digit_reverse_index

__all__ = [
    "RequestProfile",
    "StreamAllocation",
    "MultiStreamAllocation",
    "AllocationError",
    "minimal_partition",
    "check_feasibility",
    "allocate",
    "allocate_composite",
    "group_by_node",
    "stream_for_subcarriers",
]

ORDERS = ("descending", "ascending", "arrival")


class AllocationError(ValueError):
    pass


@dataclass(frozen=True)
class RequestProfile:
    """Subcarrier requests from a set of nodes sharing ``plan.m_total`` subcarriers.

    ``requests`` is a sequence of ``(node_id, subcarrier_count)`` pairs in
    arrival order.
    """

    requests: tuple[tuple[Hashable, int], ...]
    plan: DecompositionPlan

    def __init__(self, requests: Iterable[tuple[Hashable, int]], plan: DecompositionPlan | None = None,
                 *, m: int | None = None):
        if plan is None:
            if m is None:
                raise TypeError("give either a plan or m")
            plan = DecompositionPlan.radix2(m)
        reqs = tuple((node, int(count)) for node, count in requests)
        for node, count in reqs:
            if count < 1:
                raise AllocationError(f"node {node!r} requests {count} subcarriers")
        object.__setattr__(self, "requests", reqs)
        object.__setattr__(self, "plan", plan)

    @property
    def M(self) -> int:
        return self.plan.m_total

    @property
    def m(self) -> int:
        return self.plan.stage_count

    @property
    def total(self) -> int:
        return sum(c for _, c in self.requests)


@dataclass(frozen=True)
class StreamAllocation:
    """One IFDMA stream: ``size`` subcarriers spaced ``M/size`` apart starting at ``d``."""

    node_id: Hashable
    size: int
    d: int
    bins: range
    subcarriers: tuple[int, ...]
    M: int
    stage: int  # transform stage after which blocks have ``size`` lines
    bin_map: tuple[int, ...] = ()  # subcarrier carried by each bin, in bin order

    @property
    def n(self) -> int:
        if self.size & (self.size - 1):
            raise ValueError(f"stream size {self.size} is not a power of 2")
        return self.size.bit_length() - 1

    @property
    def spacing(self) -> int:
        return self.M // self.size


@dataclass(frozen=True)
class MultiStreamAllocation:
    node_id: Hashable
    streams: tuple[StreamAllocation, ...] = field(default_factory=tuple)

    @property
    def size(self) -> int:
        return sum(s.size for s in self.streams)

    @property
    def subcarriers(self) -> tuple[int, ...]:
        return tuple(sorted(k for s in self.streams for k in s.subcarriers))


def minimal_partition(n_total: int, M: int | None = None) -> list[int]:
    """Fewest powers of two summing to ``n_total`` (its set bits), largest first."""
    if n_total < 1:
        raise AllocationError(f"cannot partition {n_total}")
    if M is not None and n_total > M:
        raise AllocationError(f"request {n_total} exceeds M={M}")
    return [1 << b for b in range(n_total.bit_length() - 1, -1, -1) if n_total >> b & 1]


def check_feasibility(profile: RequestProfile) -> bool:
    """Whether every request fits once expanded into power-of-two streams."""
    expanded = sum(sum(minimal_partition(c)) for _, c in profile.requests)
    return expanded <= profile.M


def _place(streams: list[tuple[Hashable, int]], plan: DecompositionPlan, order: str,
           reverse) -> list[StreamAllocation]:
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    M = plan.m_total
    indexed = list(enumerate(streams))
    if order == "descending":
        indexed.sort(key=lambda t: (-t[1][1], t[0]))
    elif order == "ascending":
        indexed.sort(key=lambda t: (t[1][1], t[0]))

    used = [False] * M
    placed: list[tuple[int, StreamAllocation]] = []
    for pos, (node, size) in indexed:
        stage = plan.stage_for_size(size)
        start = next((s for s in range(0, M, size) if not any(used[s:s + size])), None)
        if start is None:
            raise AllocationError(f"no free aligned run of {size} bins left for node {node!r}")
        used[start:start + size] = [True] * size
        bins = range(start, start + size)
        image = tuple(reverse(b) for b in bins)
        subs = tuple(sorted(image))
        placed.append((pos, StreamAllocation(node, size, subs[0], bins, subs, M, stage, image)))
    placed.sort(key=lambda t: t[1].bins.start)
    return [a for _, a in placed]


def allocate(profile: RequestProfile, order: str = "descending") -> list[StreamAllocation]:
    """Bit-reversal allocation with Multi-IFDMA expansion (``M`` a power of two).

    Each request is split by :func:`minimal_partition`; the resulting streams
    are sorted by size (ties keep arrival order) and packed into aligned runs
    of bins from bin 0 upward.  The result is ordered by first bin.
    """
    plan = profile.plan
    if not plan.is_radix2:
        raise AllocationError("allocate needs a radix-2 plan; use allocate_composite")
    if not check_feasibility(profile):
        raise AllocationError(
            f"requests total {profile.total} subcarriers but only {profile.M} exist"
        )
    streams = [(node, size) for node, count in profile.requests for size in minimal_partition(count)]
    m = plan.stage_count
    return _place(streams, plan, order, lambda b: bit_reverse_index(b, m))


def allocate_composite(profile: RequestProfile, plan: DecompositionPlan | None = None,
                       order: str = "descending") -> list[StreamAllocation]:
    """Digit-reversal allocation for a general composite ``M``.

    Only single-stream sizes reachable by the plan are accepted (``M`` over a
    prefix product of the factors).
    """
    plan = plan or profile.plan
    if plan.m_total != profile.M:
        raise AllocationError(f"plan size {plan.m_total} does not match profile M={profile.M}")
    admissible = plan.admissible_sizes()
    for node, count in profile.requests:
        if count not in admissible:
            raise AllocationError(
                f"node {node!r} requests {count}; admissible sizes under plan "
                f"{plan.factors} are {admissible}"
            )
    if profile.total > profile.M:
        raise AllocationError(f"requests total {profile.total} but only {profile.M} exist")
    return _place(list(profile.requests), plan, order, lambda b: digit_reverse_index(b, plan))


def group_by_node(allocs: Sequence[StreamAllocation]) -> list[MultiStreamAllocation]:
    """Collect streams per node; a node's streams are listed largest first."""
    nodes: dict[Hashable, list[StreamAllocation]] = {}
    for a in allocs:
        nodes.setdefault(a.node_id, []).append(a)
    return [
        MultiStreamAllocation(node, tuple(sorted(streams, key=lambda s: (-s.size, s.bins.start))))
        for node, streams in nodes.items()
    ]


def stream_for_subcarriers(node_id: Hashable, subcarriers: Iterable[int],
                           plan: DecompositionPlan) -> StreamAllocation:
    """Build the allocation for an explicit subcarrier set.

    The set must map back onto one aligned run of bins under the plan's
    digit reversal, otherwise no embedded sub-transform carries it.
    """
    M = plan.m_total
    subs = tuple(sorted(set(int(k) for k in subcarriers)))
    if not subs or subs[0] < 0 or subs[-1] >= M:
        raise AllocationError(f"subcarriers {subs} are not a non-empty subset of [0, {M})")
    size = len(subs)
    stage = plan.stage_for_size(size)
    to_bin = {digit_reverse_index(p, plan): p for p in range(M)}
    bins = sorted(to_bin[k] for k in subs)
    start = bins[0]
    if start % size or bins != list(range(start, start + size)):
        raise AllocationError(f"subcarriers {subs} do not occupy one aligned run of bins (got {bins})")
    image = tuple(digit_reverse_index(b, plan) for b in range(start, start + size))
    return StreamAllocation(node_id, size, subs[0], range(start, start + size), subs, M, stage, image)
