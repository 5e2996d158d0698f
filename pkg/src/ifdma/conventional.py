"""Reference (per-stream) IFDMA transmitters and receiver.

These are the textbook chains the unified designs are checked against:

* time domain: repeat the block, scale by ``N/M``, apply the frequency shift;
* frequency domain: ``N``-point DFT, map onto the stream's subcarriers,
  ``M``-point inverse transform;
* receiver: ``M``-point DFT, zero-forcing equalizer, extract each stream's
  subcarriers, ``N``-point inverse transform.

A node holding several streams (Multi-IFDMA) owns one symbol block whose
length is the sum of its stream sizes; the block is split across the streams
largest first, see :func:`split_node_block`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .allocation import StreamAllocation, group_by_node
from .spectral import fft

__all__ = [
    "ChannelModel",
    "tx_time_domain",
    "tx_freq_domain",
    "tx_aggregate",
    "rx_conventional",
    "split_node_block",
    "join_node_blocks",
]


@dataclass(frozen=True)
class ChannelModel:
    """Time-domain impulse response; ``[1]`` is the identity channel."""

    taps: tuple[complex, ...] = (1.0,)

    def frequency_response(self, M: int) -> np.ndarray:
        taps = np.asarray(self.taps, dtype=np.complex128)
        if taps.size > M:
            raise ValueError(f"{taps.size} channel taps do not fit an {M}-point transform")
        padded = np.zeros(M, dtype=np.complex128)
        padded[: taps.size] = taps
        return fft(padded)

    def apply(self, signal) -> np.ndarray:
        """Circular convolution, i.e. the channel as seen after CP removal."""
        signal = np.asarray(signal, dtype=np.complex128)
        H = self.frequency_response(signal.shape[-1])
        return fft(fft(signal) * H, inverse=True)


def tx_time_domain(block, M: int, d: int) -> np.ndarray:
    block = np.asarray(block, dtype=np.complex128)
    N = block.shape[-1]
    if N < 1 or M % N:
        raise ValueError(f"block length {N} does not divide M={M}")
    if not 0 <= d < M // N:
        raise ValueError(f"frequency shift d={d} outside [0, {M // N})")
    ell = np.arange(M)
    ramp = np.exp(2j * np.pi * ((ell * d) % M) / M)
    return (N / M) * ramp * block[..., ell % N]


def _check_stream(block: np.ndarray, alloc: StreamAllocation, M: int) -> None:
    if alloc.M != M:
        raise ValueError(f"allocation is for M={alloc.M}, not {M}")
    if block.shape[-1] != alloc.size:
        raise ValueError(f"block has {block.shape[-1]} symbols, stream {alloc.node_id!r} holds {alloc.size}")


def tx_freq_domain(block, alloc: StreamAllocation, M: int) -> np.ndarray:
    block = np.asarray(block, dtype=np.complex128)
    _check_stream(block, alloc, M)
    spectrum = fft(block)
    grid = np.zeros(block.shape[:-1] + (M,), dtype=np.complex128)
    grid[..., list(alloc.subcarriers)] = spectrum
    return fft(grid, inverse=True)


def split_node_block(block, streams: Sequence[StreamAllocation]) -> list[np.ndarray]:
    """Cut a node's symbols into consecutive pieces, one per stream (largest first)."""
    block = np.asarray(block, dtype=np.complex128)
    ordered = sorted(streams, key=lambda s: (-s.size, s.bins.start))
    total = sum(s.size for s in ordered)
    if block.shape[-1] != total:
        raise ValueError(f"node block has {block.shape[-1]} symbols but its streams hold {total}")
    pieces, start = [], 0
    for s in ordered:
        pieces.append(block[..., start:start + s.size])
        start += s.size
    return pieces


def join_node_blocks(per_stream: Mapping[StreamAllocation, np.ndarray],
                     allocs: Sequence[StreamAllocation]) -> dict[Hashable, np.ndarray]:
    out = {}
    for node in group_by_node(allocs):
        out[node.node_id] = np.concatenate([per_stream[s] for s in node.streams], axis=-1)
    return out


def tx_aggregate(blocks: Mapping[Hashable, np.ndarray], allocs: Sequence[StreamAllocation],
                 M: int, domain: str = "time") -> np.ndarray:
    """Sum of per-stream transmitter outputs for every node in ``blocks``."""
    total = None
    for node in group_by_node(allocs):
        if node.node_id not in blocks:
            raise KeyError(f"no symbols for node {node.node_id!r}")
        for piece, s in zip(split_node_block(blocks[node.node_id], node.streams), node.streams):
            if domain == "time":
                sig = tx_time_domain(piece, M, s.d)
            elif domain == "freq":
                sig = tx_freq_domain(piece, s, M)
            else:
                raise ValueError(f"unknown domain {domain!r}")
            total = sig if total is None else total + sig
    if total is None:
        raise ValueError("no streams to transmit")
    return total


def rx_conventional(signal, allocs: Sequence[StreamAllocation],
                    channel: ChannelModel | None = None) -> dict[Hashable, np.ndarray]:
    """Forward transform, ZF equalization, then one extractor + small IDFT per stream."""
    signal = np.asarray(signal, dtype=np.complex128)
    M = signal.shape[-1]
    spectrum = fft(signal)
    if channel is not None:
        H = channel.frequency_response(M)
        occupied = sorted(k for a in allocs for k in a.subcarriers)
        dead = [k for k in occupied if abs(H[k]) == 0.0]
        if dead:
            raise ZeroDivisionError(f"channel gain is zero on occupied subcarrier(s) {dead}")
        safe = np.where(H == 0, 1.0, H)
        spectrum = spectrum / safe
    per_stream = {}
    for a in allocs:
        if a.M != M:
            raise ValueError(f"allocation is for M={a.M}, signal has {M} samples")
        per_stream[a] = fft(spectrum[..., list(a.subcarriers)], inverse=True)
    return join_node_blocks(per_stream, allocs)
