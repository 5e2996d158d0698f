"""Monte-Carlo PAPR and BER experiments for Multi-IFDMA, LFDMA and OFDMA.

A packet is ``ofdm_symbols_per_packet`` OFDM symbols.  Each symbol body has
``M`` samples produced by the scheme's transmitter; a cyclic prefix of
``samples_per_ofdm_symbol_with_cp - M`` samples is prepended, the packet is
upsampled by zero insertion and filtered with a unit-energy root raised
cosine.  Every packet draws its randomness from its own counter-based stream
keyed on ``(master_seed, tag, packet_index)``, so results do not depend on
how packets are spread over workers.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import erfc

from .allocation import RequestProfile, StreamAllocation, allocate
from .spectral import DecompositionPlan
from .unified import build_schedule, unified_detect_nofde, unified_multiplex

__all__ = [
    "SCHEMES",
    "ExperimentConfig",
    "CcdfCurve",
    "BerCurve",
    "qpsk_map",
    "qpsk_demap",
    "rrc_taps",
    "pulse_taps",
    "packet_rng",
    "build_packet",
    "papr",
    "clip",
    "ccdf",
    "papr_at_probability",
    "nominal_body_power",
    "qpsk_ber_theory",
    "run_ccdf",
    "run_ber",
]

SCHEMES = ("multi_ifdma", "lfdma", "ofdma")
_SCHEME_TAG = {s: i + 1 for i, s in enumerate(SCHEMES)}
_PAPR_TAG, _BER_TAG = 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    """One scheme at one load ``N``.

    ``stream_power`` sets how Multi-IFDMA streams are weighted: ``"eq2"`` uses
    the plain time-domain amplitude ``N_i/M`` per stream, ``"per_subcarrier"``
    scales each stream to ``sqrt(N_i)/M`` so every occupied subcarrier carries
    the same energy.  ``snr_db_grid`` is Eb/N0 in dB.
    """

    M: int = 16
    N: int = 4
    scheme: str = "multi_ifdma"
    rrc_beta: float = 0.5
    rrc_span_symbols: int = 20
    oversample: int = 10
    ofdm_symbols_per_packet: int = 10
    samples_per_ofdm_symbol_with_cp: int = 20
    packets: int = 10_000
    clipping_alpha: float | None = None
    snr_db_grid: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    master_seed: int = 20240601
    stream_power: str = "eq2"
    pulse: str = "rrc"
    min_bit_errors: int = 100
    max_packets: int = 20_000
    chunk_packets: int = 250
    ccdf_min_db: float = 0.0
    ccdf_max_db: float = 14.0
    ccdf_step_db: float = 0.05

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.M < 1 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of 2, got {self.M}")
        if not 1 <= self.N <= self.M:
            raise ValueError(f"N={self.N} must lie in [1, M={self.M}]")
        if self.samples_per_ofdm_symbol_with_cp < self.M:
            raise ValueError("samples_per_ofdm_symbol_with_cp must be at least M")
        if not 0 < self.rrc_beta <= 1:
            raise ValueError(f"rrc_beta must lie in (0, 1], got {self.rrc_beta}")
        if self.clipping_alpha is not None and self.clipping_alpha <= 0:
            raise ValueError("clipping_alpha must be positive")
        if self.stream_power not in ("eq2", "per_subcarrier"):
            raise ValueError("stream_power must be 'eq2' or 'per_subcarrier'")
        if self.pulse not in ("rrc", "rect"):
            raise ValueError("pulse must be 'rrc' or 'rect'")
        for name in ("rrc_span_symbols", "oversample", "ofdm_symbols_per_packet", "packets",
                     "min_bit_errors", "max_packets", "chunk_packets"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.ccdf_step_db <= 0 or self.ccdf_max_db <= self.ccdf_min_db:
            raise ValueError("bad CCDF threshold grid")
        object.__setattr__(self, "snr_db_grid", tuple(float(s) for s in self.snr_db_grid))

    @property
    def cp(self) -> int:
        return self.samples_per_ofdm_symbol_with_cp - self.M

    @property
    def samples_per_packet(self) -> int:
        return self.samples_per_ofdm_symbol_with_cp * self.ofdm_symbols_per_packet * self.oversample

    @property
    def bits_per_packet(self) -> int:
        return 2 * self.N * self.ofdm_symbols_per_packet

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


@dataclass
class CcdfCurve:
    thresholds_db: np.ndarray
    probability: np.ndarray
    scheme: str
    N: int
    M: int
    clipped: bool = False
    papr_db: np.ndarray = field(default_factory=lambda: np.zeros(0))  # one value per packet
    clipped_samples: int = 0


@dataclass
class BerCurve:
    snr_db: np.ndarray
    ber: np.ndarray
    scheme: str
    clipped: bool
    bit_errors: np.ndarray
    bits: np.ndarray


# -- modulation ---------------------------------------------------------------

def qpsk_map(bits) -> np.ndarray:
    """Gray QPSK: 00 -> (1+j)/√2, 01 -> (-1+j)/√2, 11 -> (-1-j)/√2, 10 -> (1-j)/√2."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise ValueError(f"QPSK needs an even number of bits, got {bits.shape[-1]}")
    b = bits.reshape(bits.shape[:-1] + (-1, 2)).astype(np.int8)
    re = 1 - 2 * b[..., 1]
    im = 1 - 2 * b[..., 0]
    return (re + 1j * im) / np.sqrt(2)


def qpsk_demap(samples) -> np.ndarray:
    """Minimum-distance decisions, i.e. the signs of both quadratures."""
    s = np.asarray(samples)
    out = np.empty(s.shape + (2,), dtype=np.int8)
    out[..., 0] = s.imag < 0
    out[..., 1] = s.real < 0
    return out.reshape(s.shape[:-1] + (-1,))


def qpsk_ber_theory(ebn0_db) -> np.ndarray:
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10)
    return 0.5 * erfc(np.sqrt(ebn0))


# -- pulse shaping --------------------------------------------------------------

def rrc_taps(beta: float, span: int, oversample: int) -> np.ndarray:
    """Root raised cosine truncated to ``span * oversample + 1`` taps, unit energy."""
    t = (np.arange(span * oversample + 1) - span * oversample / 2) / oversample
    h = np.empty_like(t)
    for i, tt in enumerate(t):
        if abs(tt) < 1e-12:
            h[i] = 1 - beta + 4 * beta / np.pi
        elif abs(abs(4 * beta * tt) - 1) < 1e-9:
            h[i] = beta / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                                        + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta)))
        else:
            h[i] = (np.sin(np.pi * tt * (1 - beta)) + 4 * beta * tt * np.cos(np.pi * tt * (1 + beta))) \
                / (np.pi * tt * (1 - (4 * beta * tt) ** 2))
    return h / np.sqrt(np.sum(h * h))


def pulse_taps(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.pulse == "rect":
        return np.full(cfg.oversample, 1 / np.sqrt(cfg.oversample))
    return rrc_taps(cfg.rrc_beta, cfg.rrc_span_symbols, cfg.oversample)


# -- measurements ---------------------------------------------------------------

def papr(samples) -> float | np.ndarray:
    """Peak-to-average power in dB over the last axis."""
    p = np.abs(np.asarray(samples)) ** 2
    if p.shape[-1] == 0:
        raise ValueError("empty signal")
    mean = p.mean(axis=-1)
    if np.any(mean == 0):
        raise ValueError("signal has zero power")
    return 10 * np.log10(p.max(axis=-1) / mean)


def clip(samples, alpha: float, mean_power: float | None = None) -> np.ndarray:
    """Cap magnitudes at ``alpha * sqrt(mean_power)`` keeping the phase.

    ``mean_power`` defaults to the signal's own mean power.
    """
    x = np.asarray(samples, dtype=np.complex128)
    if mean_power is None:
        mean_power = float(np.mean(np.abs(x) ** 2))
    gamma = alpha * math.sqrt(mean_power)
    mag = np.abs(x)
    over = mag > gamma
    return np.where(over, gamma * x / np.where(over, mag, 1.0), x)


def ccdf(papr_db, thresholds_db) -> np.ndarray:
    """Empirical ``Pr(PAPR > threshold)``."""
    v = np.sort(np.asarray(papr_db, dtype=float))
    th = np.asarray(thresholds_db, dtype=float)
    return 1.0 - np.searchsorted(v, th, side="right") / v.size


def papr_at_probability(curve: CcdfCurve, prob: float = 1e-3) -> float:
    """PAPR level exceeded with probability ``prob`` (the ``1 - prob`` quantile)."""
    return float(np.quantile(curve.papr_db, 1.0 - prob))


# -- transmitters -----------------------------------------------------------------

def packet_rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=key)))


def _multi_allocation(cfg: ExperimentConfig) -> list[StreamAllocation]:
    m = cfg.M.bit_length() - 1
    return allocate(RequestProfile([("u", cfg.N)], DecompositionPlan.radix2(m)))


def _stream_weights(cfg: ExperimentConfig, allocs) -> np.ndarray:
    """Per-symbol gain on the node block (streams are laid out largest first)."""
    sizes = sorted((a.size for a in allocs), reverse=True)
    if cfg.stream_power == "eq2":
        return np.ones(cfg.N)
    return np.concatenate([np.full(n, 1 / np.sqrt(n)) for n in sizes])


def nominal_body_power(cfg: ExperimentConfig) -> float:
    """Expected power of one body sample before pulse shaping."""
    M, N = cfg.M, cfg.N
    if cfg.scheme == "lfdma":
        return N * N / M ** 2
    if cfg.scheme == "ofdma":
        return N / M ** 2
    if cfg.stream_power == "per_subcarrier":
        return N / M ** 2
    return sum(a.size ** 2 for a in _multi_allocation(cfg)) / M ** 2


@dataclass
class _Draw:
    bits: np.ndarray  # (packets, symbols, 2N)
    body: np.ndarray  # (packets, symbols, M)
    subcarriers: np.ndarray | None  # (packets, N) for LFDMA/OFDMA


def _draw_bodies(cfg: ExperimentConfig, rngs: Sequence[np.random.Generator]) -> _Draw:
    S, N, M = cfg.ofdm_symbols_per_packet, cfg.N, cfg.M
    bits, subs = [], []
    for rng in rngs:
        bits.append(rng.integers(0, 2, size=(S, 2 * N), dtype=np.int8))
        if cfg.scheme == "lfdma":
            start = int(rng.integers(0, M - N + 1))
            subs.append(np.arange(start, start + N))
        elif cfg.scheme == "ofdma":
            subs.append(np.sort(rng.choice(M, size=N, replace=False)))
    bits = np.stack(bits)
    sym = qpsk_map(bits)
    if cfg.scheme == "multi_ifdma":
        allocs = _multi_allocation(cfg)
        sched = build_schedule(allocs, DecompositionPlan.radix2(M.bit_length() - 1), "transmit")
        body = unified_multiplex({"u": sym * _stream_weights(cfg, allocs)}, sched)
        return _Draw(bits, body, None)
    subs = np.stack(subs)
    values = np.fft.fft(sym, axis=-1) if cfg.scheme == "lfdma" else sym
    grid = np.zeros(sym.shape[:-1] + (M,), dtype=np.complex128)
    rows = np.arange(len(rngs))[:, None, None]
    cols = np.arange(S)[None, :, None]
    grid[rows, cols, subs[:, None, :]] = values
    return _Draw(bits, np.fft.ifft(grid, axis=-1), subs)


def _serialize(cfg: ExperimentConfig, body: np.ndarray) -> np.ndarray:
    """Add CP, flatten symbols and upsample by zero insertion."""
    with_cp = np.concatenate([body[..., body.shape[-1] - cfg.cp:], body], axis=-1)
    flat = with_cp.reshape(body.shape[0], -1)
    up = np.zeros((flat.shape[0], flat.shape[1] * cfg.oversample), dtype=np.complex128)
    up[:, :: cfg.oversample] = flat
    return up


def _shape(cfg: ExperimentConfig, body: np.ndarray, mode: str) -> np.ndarray:
    h = pulse_taps(cfg)
    return fftconvolve(_serialize(cfg, body), h[None, :], mode=mode, axes=1)


def build_packet(cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    """One packet of ``samples_per_packet`` oversampled, pulse-shaped samples."""
    return _shape(cfg, _draw_bodies(cfg, [rng]).body, "same")[0]


# -- runners ------------------------------------------------------------------------

def _chunks(total: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def _ccdf_chunk(args) -> tuple[np.ndarray, np.ndarray, int]:
    cfg, lo, hi = args
    rngs = [packet_rng(cfg.master_seed, _PAPR_TAG, _SCHEME_TAG[cfg.scheme], cfg.N, i) for i in range(lo, hi)]
    y = _shape(cfg, _draw_bodies(cfg, rngs).body, "same")
    plain = papr(y)
    if cfg.clipping_alpha is None:
        return plain, plain, 0
    ref = nominal_body_power(cfg) / cfg.oversample
    yc = clip(y, cfg.clipping_alpha, ref)
    n_clipped = int(np.count_nonzero(np.abs(y) > cfg.clipping_alpha * math.sqrt(ref)))
    return plain, papr(yc), n_clipped


class _Runner:
    """Ordered map over a process pool, or in-process for one worker."""

    def __init__(self, workers: int):
        self.pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None

    def map(self, fn, jobs: list) -> list:
        if self.pool is None or len(jobs) <= 1:
            return [fn(j) for j in jobs]
        return list(self.pool.map(fn, jobs))

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()


def _thresholds(cfg: ExperimentConfig) -> np.ndarray:
    n = int(round((cfg.ccdf_max_db - cfg.ccdf_min_db) / cfg.ccdf_step_db))
    return np.round(cfg.ccdf_min_db + cfg.ccdf_step_db * np.arange(n + 1), 10)


def run_ccdf(cfg: ExperimentConfig, workers: int = 1) -> list[CcdfCurve]:
    """PAPR CCDF over ``cfg.packets`` packets.

    Returns the unclipped curve, followed by the clipped one when
    ``clipping_alpha`` is set.  Clipping is relative to the scheme's expected
    mean power after pulse shaping.
    """
    jobs = [(cfg, lo, hi) for lo, hi in _chunks(cfg.packets, cfg.chunk_packets)]
    with _Runner(workers) as runner:
        parts = runner.map(_ccdf_chunk, jobs)
    plain = np.concatenate([p[0] for p in parts])
    th = _thresholds(cfg)
    curves = [CcdfCurve(th, ccdf(plain, th), cfg.scheme, cfg.N, cfg.M, False, plain)]
    if cfg.clipping_alpha is not None:
        clipped = np.concatenate([p[1] for p in parts])
        n = sum(p[2] for p in parts)
        curves.append(CcdfCurve(th, ccdf(clipped, th), cfg.scheme, cfg.N, cfg.M, True, clipped, n))
    return curves


def _receive(cfg: ExperimentConfig, draw: _Draw, y: np.ndarray) -> np.ndarray:
    """Symbol-rate samples (packets, symbols, M+CP) back to bits."""
    body = y[..., cfg.cp:]
    if cfg.scheme == "multi_ifdma":
        allocs = _multi_allocation(cfg)
        sched = build_schedule(allocs, DecompositionPlan.radix2(cfg.M.bit_length() - 1), "no-fde")
        sym = unified_detect_nofde(body, sched)["u"]
    else:
        spec = np.fft.fft(body, axis=-1)
        picked = np.take_along_axis(spec, draw.subcarriers[:, None, :], axis=-1)
        sym = np.fft.ifft(picked, axis=-1) if cfg.scheme == "lfdma" else picked
    return qpsk_demap(sym)


def _ber_chunk(args) -> tuple[np.ndarray, np.ndarray]:
    """Bit errors per packet for one chunk, unclipped and clipped."""
    cfg, snr_index, lo, hi = args
    ebn0 = 10 ** (cfg.snr_db_grid[snr_index] / 10)
    rngs = [packet_rng(cfg.master_seed, _BER_TAG, _SCHEME_TAG[cfg.scheme], cfg.N, snr_index, i)
            for i in range(lo, hi)]
    draw = _draw_bodies(cfg, rngs)
    h = pulse_taps(cfg)
    x = fftconvolve(_serialize(cfg, draw.body), h[None, :], mode="full", axes=1)
    ps = nominal_body_power(cfg)
    sigma2 = cfg.M * ps / (cfg.N * 2 * ebn0)
    noise = np.stack([
        (rng.standard_normal(x.shape[1]) + 1j * rng.standard_normal(x.shape[1])) * math.sqrt(sigma2 / 2)
        for rng in rngs
    ])
    n_sym = cfg.samples_per_ofdm_symbol_with_cp * cfg.ofdm_symbols_per_packet
    idx = (len(h) - 1) + cfg.oversample * np.arange(n_sym)
    shape = (len(rngs), cfg.ofdm_symbols_per_packet, cfg.samples_per_ofdm_symbol_with_cp)

    def errors(tx):
        r = fftconvolve(tx + noise, h[None, ::-1].conj(), mode="full", axes=1)[:, idx]
        return np.count_nonzero(_receive(cfg, draw, r.reshape(shape)) != draw.bits, axis=(1, 2))

    plain = errors(x)
    if cfg.clipping_alpha is None:
        return plain, plain
    return plain, errors(clip(x, cfg.clipping_alpha, ps / cfg.oversample))


def run_ber(cfg: ExperimentConfig, workers: int = 1) -> list[BerCurve]:
    """BER per Eb/N0 point; unclipped curve first, clipped one if configured.

    Each point runs fixed-size chunks in order until the unclipped errors
    reach ``min_bit_errors`` or ``max_packets`` packets have been sent.  The
    clipped curve reuses the same symbols and noise.
    """
    if not cfg.snr_db_grid:
        raise ValueError("snr_db_grid is empty")
    chunks = _chunks(cfg.max_packets, cfg.chunk_packets)
    step = max(1, workers)
    results = {False: ([], []), True: ([], [])}
    with _Runner(workers) as runner:
        for k in range(len(cfg.snr_db_grid)):
            err = {False: 0, True: 0}
            sent = 0
            for g in range(0, len(chunks), step):
                group = chunks[g:g + step]
                outs = runner.map(_ber_chunk, [(cfg, k, lo, hi) for lo, hi in group])
                for (lo, hi), (plain, clipped) in zip(group, outs):
                    err[False] += int(plain.sum())
                    err[True] += int(clipped.sum())
                    sent += hi - lo
                    if err[False] >= cfg.min_bit_errors:
                        break
                if err[False] >= cfg.min_bit_errors:
                    break
            for flag in (False, True):
                results[flag][0].append(err[flag])
                results[flag][1].append(sent * cfg.bits_per_packet)
    snr = np.asarray(cfg.snr_db_grid)
    out = []
    for flag in (False, True) if cfg.clipping_alpha is not None else (False,):
        e, b = (np.asarray(v) for v in results[flag])
        out.append(BerCurve(snr, e / b, cfg.scheme, flag, e, b))
    return out
