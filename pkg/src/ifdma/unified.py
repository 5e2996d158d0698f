"""IFDMA multiplexing and demultiplexing inside one M-point transform.

After ``s`` butterfly stages of the inverse transform, every aligned block of
``block_size(s)`` lines holds a complete smaller inverse transform of an
evenly spaced subset of subcarriers.  A stream allocated to such a block can
therefore be tapped off (receiver) or injected (transmitter) at stage ``s``,
and one transform serves streams of every size at once.

Tapping is modelled per line as a bus of ``R + 1`` two-by-two switches, one
after the front permutation and one after each stage.  The switch model is
the routing contract only; no gates are simulated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .allocation import StreamAllocation, group_by_node
from .conventional import join_node_blocks, split_node_block
from .spectral import (
    DecompositionPlan,
    MultiplyCounter,
    bit_reverse_index,
    digit_reversal_permutation,
    fft,
    stage_apply,
    stage_undo,
)

__all__ = [
    "SwitchState",
    "SwitchElement",
    "TapSchedule",
    "ScheduleError",
    "prop2_inputs",
    "trace_block_inputs",
    "build_schedule",
    "unified_detect",
    "unified_detect_nofde",
    "unified_multiplex",
    "unified_receive",
]

VARIANTS = ("with-fde", "no-fde", "transmit")


class ScheduleError(ValueError):
    pass


class SwitchState(enum.Enum):
    THROUGH = 0
    EXIT = 1


@dataclass(frozen=True)
class SwitchElement:
    """Two-input, two-output switch on a tapping bus.

    ``in1`` comes from the butterfly network, ``in2`` from the previous switch
    on the bus.  Outputs are ``(through, exit)``: ``through`` continues into
    the next butterfly stage, ``exit`` continues along the bus.

    The tailored element keeps feeding ``in1`` to ``through`` in the Exit
    state (broadcast).  The generic element swaps its inputs instead, which
    puts the bus value (zero, on a well-formed bus) back into the network.
    """

    state: SwitchState = SwitchState.THROUGH
    tailored: bool = True

    def route(self, in1, in2):
        if self.state is SwitchState.THROUGH:
            return in1, in2
        if self.tailored:
            # OR of in1 with a bus that carries zero until this point
            return in1, in1 + in2
        return in2, in1


def _route_lines(exit_mask: np.ndarray, in1: np.ndarray, in2: np.ndarray, tailored: bool):
    """Vectorised :meth:`SwitchElement.route` over all lines of one stage."""
    if tailored:
        return in1, np.where(exit_mask, in1 + in2, in2)
    return np.where(exit_mask, in2, in1), np.where(exit_mask, in1, in2)


@dataclass(frozen=True)
class TapSchedule:
    """Per-line switch settings for one transform.

    ``exit_stage[p]`` is the stage index, counted in the direction the
    transform runs, at which line ``p``'s switch is in the Exit state (or the
    stream is inserted, for ``variant == "transmit"``); ``-1`` marks a line
    that never exits.
    """

    plan: DecompositionPlan
    variant: str
    exit_stage: tuple[int, ...]
    owner: tuple[Hashable | None, ...]
    streams: tuple[StreamAllocation, ...]

    @property
    def M(self) -> int:
        return self.plan.m_total

    @property
    def direction(self) -> str:
        return "multiplexer" if self.variant == "transmit" else "detector"

    @property
    def switch_count(self) -> int:
        """Switch positions instantiated: one per line per tap point."""
        return self.M * (self.plan.stage_count + 1)

    def switch_states(self) -> np.ndarray:
        """``(R + 1, M)`` boolean array, True where the switch is in Exit state."""
        R = self.plan.stage_count
        stages = np.asarray(self.exit_stage)
        return np.arange(R + 1)[:, None] == stages[None, :]

    def stream_stage(self, stream: StreamAllocation) -> int:
        return self.exit_stage[stream.bins.start]


def prop2_inputs(m: int, t: int, d_prime: int) -> list[int]:
    """Subcarriers feeding the ``d_prime``-th embedded ``2**(m-t)``-point transform."""
    if not 0 <= t <= m:
        raise ValueError(f"t={t} outside [0, {m}]")
    if not 0 <= d_prime < (1 << t):
        raise ValueError(f"d'={d_prime} outside [0, {1 << t})")
    d = bit_reverse_index(d_prime, t)
    return [d + j * (1 << t) for j in range(1 << (m - t))]


def trace_block_inputs(plan: DecompositionPlan, depth: int, block: int) -> list[int]:
    """Brute-force the subcarriers feeding ``block`` after ``depth`` recursive splits.

    At depth ``t`` the transform consists of sub-transforms that are complete
    once ``R - t`` butterfly stages have run.  An impulse on each subcarrier
    is pushed through the front permutation and those stages; the subcarrier
    is an input of the block if any of the block's lines ends up non-zero.
    """
    M = plan.m_total
    stages = plan.stage_count - depth
    size = plan.block_size(stages)
    lo, hi = block * size, (block + 1) * size
    impulses = np.eye(M, dtype=np.complex128)
    state = impulses[:, digit_reversal_permutation(plan)]
    for s in range(1, stages + 1):
        state = stage_apply(state, plan, s, inverse=True)
    hits = np.abs(state[:, lo:hi]).max(axis=1) > 0
    return [k for k in range(M) if hits[k]]


def build_schedule(allocs: Sequence[StreamAllocation], plan: DecompositionPlan | int,
                   variant: str = "with-fde") -> TapSchedule:
    """Switch settings for a set of disjoint, block-aligned streams.

    ``with-fde``: a stream of size ``block_size(s)`` exits after inverse stage
    ``s``.  ``no-fde``: it exits after forward stage ``R - s``.  ``transmit``:
    it is inserted after inverse stage ``s``.
    """
    if isinstance(plan, int):
        plan = DecompositionPlan.radix2(plan)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    M, R = plan.m_total, plan.stage_count
    exit_stage = [-1] * M
    owner: list[Hashable | None] = [None] * M
    for a in allocs:
        if a.M != M:
            raise ScheduleError(f"stream for M={a.M} in a schedule for M={M}")
        s = plan.stage_for_size(a.size)
        if a.bins.start % a.size or len(a.bins) != a.size:
            raise ScheduleError(f"stream {a.node_id!r} bins {a.bins} are not an aligned block of {a.size}")
        for p in a.bins:
            if owner[p] is not None:
                raise ScheduleError(f"bin line {p} claimed by {owner[p]!r} and {a.node_id!r}")
            owner[p] = a.node_id
            exit_stage[p] = R - s if variant == "no-fde" else s
    return TapSchedule(plan, variant, tuple(exit_stage), tuple(owner), tuple(allocs))


def _check(x, schedule: TapSchedule, variants: tuple[str, ...]) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if schedule.variant not in variants:
        raise ScheduleError(f"schedule variant {schedule.variant!r} cannot be used here")
    if x.shape[-1] != schedule.M:
        raise ScheduleError(f"input has {x.shape[-1]} samples, schedule is for M={schedule.M}")
    return x


def _run_bus(state: np.ndarray, schedule: TapSchedule, step, tailored: bool) -> np.ndarray:
    """Walk stages 0..R with a tapping bus on every line; returns the bus outputs."""
    exits = schedule.switch_states()
    bus = np.zeros_like(state)
    for s in range(schedule.plan.stage_count + 1):
        if s:
            state = step(state, s)
        state, bus = _route_lines(exits[s], state, bus, tailored)
    return bus


def _read_streams(bus: np.ndarray, schedule: TapSchedule) -> dict[Hashable, np.ndarray]:
    per_stream = {a: bus[..., a.bins.start:a.bins.stop] for a in schedule.streams}
    return join_node_blocks(per_stream, schedule.streams)


def unified_detect(freq_data, schedule: TapSchedule, tailored: bool = True,
                   counter: MultiplyCounter | None = None) -> dict[Hashable, np.ndarray]:
    """Demultiplex every stream from equalized subcarrier values with one inverse transform."""
    X = _check(freq_data, schedule, ("with-fde",))
    plan = schedule.plan
    state = X[..., digit_reversal_permutation(plan)]
    bus = _run_bus(state, schedule, lambda st, s: stage_apply(st, plan, s, inverse=True, counter=counter),
                   tailored)
    return _read_streams(bus, schedule)


def unified_detect_nofde(time_signal, schedule: TapSchedule, tailored: bool = True,
                         counter: MultiplyCounter | None = None) -> dict[Hashable, np.ndarray]:
    """Demultiplex straight from the time signal inside one forward transform.

    Forward stage ``j`` undoes inverse stage ``R + 1 - j``, so no permutation
    is needed and a full-band stream is read off before any butterfly.
    """
    y = _check(time_signal, schedule, ("no-fde",))
    plan = schedule.plan
    R = plan.stage_count
    bus = _run_bus(y, schedule, lambda st, j: stage_undo(st, plan, R + 1 - j, inverse=True, counter=counter),
                   tailored)
    return _read_streams(bus, schedule)


def unified_multiplex(blocks: Mapping[Hashable, np.ndarray], schedule: TapSchedule,
                      counter: MultiplyCounter | None = None) -> np.ndarray:
    """Build the aggregate time signal of all streams with one inverse transform.

    Each stream's symbols are written onto its bin lines right after its
    stage; lines nobody owns stay zero.
    """
    if schedule.variant != "transmit":
        raise ScheduleError(f"schedule variant {schedule.variant!r} cannot be used to transmit")
    plan = schedule.plan
    pieces: dict[int, list[tuple[range, np.ndarray]]] = {}
    lead = None
    for node in group_by_node(schedule.streams):
        if node.node_id not in blocks:
            raise KeyError(f"no symbols for node {node.node_id!r}")
        for piece, s in zip(split_node_block(blocks[node.node_id], node.streams), node.streams):
            if lead is None:
                lead = piece.shape[:-1]
            elif piece.shape[:-1] != lead:
                raise ValueError("all blocks must share the same batch shape")
            pieces.setdefault(schedule.stream_stage(s), []).append((s.bins, piece))
    if lead is None:
        raise ValueError("schedule has no streams")

    state = np.zeros(lead + (schedule.M,), dtype=np.complex128)
    for s in range(plan.stage_count + 1):
        if s:
            state = stage_apply(state, plan, s, inverse=True, counter=counter)
        for bins, piece in pieces.get(s, ()):
            state[..., bins.start:bins.stop] = piece
    return state


def unified_receive(signal, schedule: TapSchedule, channel=None) -> dict[Hashable, np.ndarray]:
    """Forward transform, optional ZF equalizer, then :func:`unified_detect`."""
    spectrum = fft(np.asarray(signal, dtype=np.complex128), schedule.plan)
    if channel is not None:
        spectrum = spectrum / channel.frequency_response(schedule.M)
    return unified_detect(spectrum, schedule)
