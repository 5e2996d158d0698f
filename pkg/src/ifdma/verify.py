"""Self-check property suites used by ``ifdma verify``.

Each property returns a :class:`Result`; on failure ``detail`` holds the
first counterexample found.  Suites are deterministic (fixed seeds).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import spectral
from .allocation import RequestProfile, allocate, allocate_composite, check_feasibility, stream_for_subcarriers
from .conventional import rx_conventional, tx_aggregate
from .spectral import DecompositionPlan, MultiplyCounter, dft_naive, fft, fft_reflected
from .unified import (
    build_schedule,
    prop2_inputs,
    trace_block_inputs,
    unified_detect,
    unified_detect_nofde,
    unified_multiplex,
)

__all__ = ["Result", "SCOPES", "run_suite", "random_instance", "feasible_multisets"]

TOL = 1e-9


@dataclass(frozen=True)
class Result:
    name: str
    ok: bool
    detail: str = ""


def _cvec(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _relerr(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


# -- spectral ---------------------------------------------------------------------

def check_fft_oracle(sizes=(2, 4, 8, 16, 64, 256, 6, 12, 24, 30, 48), trials=20) -> Result:
    rng = np.random.default_rng(1)
    for M in sizes:
        for plan in spectral.enumerate_plans(M)[:6]:
            x = _cvec(rng, trials, M)
            for inverse in (False, True):
                ref = np.stack([dft_naive(v, inverse) for v in x])
                for fn in (fft, fft_reflected):
                    err = _relerr(fn(x, plan, inverse), ref)
                    if err > TOL:
                        return Result("fft_matches_naive_dft", False,
                                      f"{fn.__name__} M={M} plan={plan.factors} inverse={inverse} rel err {err:.3g}")
    return Result("fft_matches_naive_dft", True)


def check_permutations(max_M=64) -> Result:
    for M in range(2, max_M + 1):
        for plan in spectral.enumerate_plans(M)[:4]:
            p = spectral.digit_reversal_permutation(plan)
            q = spectral.digit_reversal_permutation(plan.reversed())
            if not np.array_equal(p[q], np.arange(M)):
                return Result("digit_reversal_inverse", False, f"plan {plan.factors}: reversed plan is not the inverse")
            if not np.array_equal(spectral.shuffle_permutation(plan), p):
                return Result("digit_reversal_inverse", False, f"plan {plan.factors}: shuffle cascade differs")
    return Result("digit_reversal_inverse", True)


def check_stage_undo(sizes=(8, 12, 16, 18)) -> Result:
    rng = np.random.default_rng(2)
    for M in sizes:
        for plan in spectral.enumerate_plans(M)[:4]:
            x = _cvec(rng, 3, M)
            for s in range(1, plan.stage_count + 1):
                for inverse in (False, True):
                    y = spectral.stage_undo(spectral.stage_apply(x, plan, s, inverse), plan, s, inverse)
                    if _relerr(y, x) > TOL:
                        return Result("stage_undo_inverts_stage", False, f"plan {plan.factors} stage {s}")
    return Result("stage_undo_inverts_stage", True)


def check_multiply_count(ms=range(1, 11)) -> Result:
    for m in ms:
        M = 1 << m
        c = MultiplyCounter()
        fft(np.ones(M), DecompositionPlan.radix2(m), inverse=True, counter=c)
        if c.count != M // 2 * m:
            return Result("multiply_count_half_M_log_M", False, f"M={M}: counted {c.count}, expected {M // 2 * m}")
    return Result("multiply_count_half_M_log_M", True)


# -- proposition on embedded transforms ------------------------------------------------

def check_prop2(max_m=6) -> Result:
    for m in range(1, max_m + 1):
        plan = DecompositionPlan.radix2(m)
        for t in range(m + 1):
            for dp in range(1 << t):
                traced = trace_block_inputs(plan, t, dp)
                if traced != prop2_inputs(m, t, dp):
                    return Result("embedded_transform_inputs", False,
                                  f"m={m} t={t} d'={dp}: traced {traced}, law {prop2_inputs(m, t, dp)}")
    return Result("embedded_transform_inputs", True)


# -- allocation -------------------------------------------------------------------------

def feasible_multisets(M: int):
    """Every non-increasing request tuple whose minimal partitions fit ``M``."""
    def rec(remaining, cap, prefix):
        if prefix:
            yield tuple(prefix)
        for n in range(min(cap, remaining), 0, -1):
            cost = sum(1 << b for b in range(n.bit_length()) if n >> b & 1)
            if cost <= remaining:
                yield from rec(remaining - cost, n, prefix + [n])
    yield from rec(M, M, [])


def check_allocation_exhaustive(max_m=4) -> Result:
    for m in range(1, max_m + 1):
        M = 1 << m
        for reqs in feasible_multisets(M):
            prof = RequestProfile([(i, n) for i, n in enumerate(reqs)], m=m)
            if not check_feasibility(prof):
                return Result("allocation_disjoint_interleaved", False, f"M={M} {reqs} judged infeasible")
            allocs = allocate(prof)
            seen = set()
            for a in allocs:
                expect = tuple(a.d + i * (M // a.size) for i in range(a.size))
                if a.subcarriers != expect or seen & set(a.subcarriers):
                    return Result("allocation_disjoint_interleaved", False, f"M={M} requests {reqs}: {a}")
                seen |= set(a.subcarriers)
            for i, n in enumerate(reqs):
                if sum(a.size for a in allocs if a.node_id == i) != n:
                    return Result("allocation_disjoint_interleaved", False, f"M={M} {reqs}: node {i} short")
    return Result("allocation_disjoint_interleaved", True)


def check_allocation_examples() -> Result:
    got = {a.node_id: a.subcarriers for a in allocate(RequestProfile([("A", 2), ("B", 1), ("C", 4)], m=3))}
    if got != {"C": (0, 2, 4, 6), "A": (1, 5), "B": (3,)}:
        return Result("allocation_worked_examples", False, f"M=8 example gave {got}")
    plan = DecompositionPlan((2, 3, 2))
    got = {a.node_id: a.subcarriers
           for a in allocate_composite(RequestProfile([("A", 6), ("B", 2), ("C", 1)], plan), order="ascending")}
    if got != {"A": (1, 3, 5, 7, 9, 11), "B": (2, 8), "C": (0,)}:
        return Result("allocation_worked_examples", False, f"M=12 example gave {got}")
    return Result("allocation_worked_examples", True)


# -- transceivers ----------------------------------------------------------------------

def random_instance(rng: np.random.Generator, m: int, batch: int = 1):
    """Random feasible request set on ``M = 2**m`` with random symbol blocks."""
    M = 1 << m
    reqs, left = [], M
    while left and (not reqs or rng.random() < 0.7):
        n = int(rng.integers(1, left + 1))
        cost = sum(1 << b for b in range(n.bit_length()) if n >> b & 1)
        if cost > left:
            break
        reqs.append(n)
        left -= cost
    prof = RequestProfile([(f"n{i}", n) for i, n in enumerate(reqs)], m=m)
    order = ("descending", "ascending", "arrival")[int(rng.integers(3))]
    allocs = allocate(prof, order=order)
    blocks = {node: _cvec(rng, batch, n) for node, n in prof.requests}
    return allocs, blocks


def _max_block_err(a: dict, b: dict) -> float:
    return max(float(np.max(np.abs(a[k] - b[k]))) for k in b)


def check_transmitters(ms=(3, 4, 5, 6), trials=50) -> Result:
    rng = np.random.default_rng(3)
    for m in ms:
        M = 1 << m
        for _ in range(trials):
            allocs, blocks = random_instance(rng, m)
            t = tx_aggregate(blocks, allocs, M, "time")
            f = tx_aggregate(blocks, allocs, M, "freq")
            u = unified_multiplex(blocks, build_schedule(allocs, m, "transmit"))
            err = max(np.max(np.abs(t - f)), np.max(np.abs(t - u)))
            if err > TOL:
                return Result("transmitters_agree", False, f"M={M} allocs={[(a.node_id, a.subcarriers) for a in allocs]} err {err:.3g}")
    return Result("transmitters_agree", True)


def check_detectors(ms=(3, 4, 5, 6), trials=50) -> Result:
    rng = np.random.default_rng(4)
    for m in ms:
        M = 1 << m
        for _ in range(trials):
            allocs, blocks = random_instance(rng, m)
            y = tx_aggregate(blocks, allocs, M)
            ref = rx_conventional(y, allocs)
            a = unified_detect(fft(y), build_schedule(allocs, m, "with-fde"))
            b = unified_detect_nofde(y, build_schedule(allocs, m, "no-fde"))
            err = max(_max_block_err(a, ref), _max_block_err(b, ref), _max_block_err(ref, blocks))
            if err > TOL:
                return Result("detectors_agree", False, f"M={M} allocs={[(a.node_id, a.subcarriers) for a in allocs]} err {err:.3g}")
    return Result("detectors_agree", True)


def check_worked_scenario() -> Result:
    plan = DecompositionPlan.radix2(3)
    allocs = [stream_for_subcarriers(n, s, plan) for n, s in (("A", (1, 3, 5, 7)), ("B", (0, 4)), ("C", (6,)))]
    stages = {v: {a.node_id: build_schedule(allocs, plan, v).stream_stage(a) for a in allocs}
              for v in ("with-fde", "no-fde")}
    if stages != {"with-fde": {"A": 2, "B": 1, "C": 0}, "no-fde": {"A": 1, "B": 2, "C": 3}}:
        return Result("worked_scenario_schedule", False, f"exit stages {stages}")
    rng = np.random.default_rng(5)
    blocks = {a.node_id: _cvec(rng, a.size) for a in allocs}
    y = unified_multiplex(blocks, build_schedule(allocs, plan, "transmit"))
    ref = rx_conventional(y, allocs)
    got = unified_detect_nofde(y, build_schedule(allocs, plan, "no-fde"))
    err = max(_max_block_err(ref, blocks), _max_block_err(got, blocks))
    return Result("worked_scenario_schedule", err <= TOL, "" if err <= TOL else f"err {err:.3g}")


def check_contamination(trials=200, max_m=5) -> Result:
    rng = np.random.default_rng(6)
    for i in range(trials):
        m = int(rng.integers(1, max_m + 1))
        allocs, blocks = random_instance(rng, m)
        X = fft(tx_aggregate(blocks, allocs, 1 << m))
        for variant, data, fn in (("with-fde", X, unified_detect),
                                  ("no-fde", fft(X, inverse=True), unified_detect_nofde)):
            sched = build_schedule(allocs, m, variant)
            broadcast = fn(data, sched, tailored=True)
            strict = fn(data, sched, tailored=False)
            for k in strict:
                if not np.array_equal(broadcast[k], strict[k]):
                    return Result("exit_broadcast_harmless", False, f"trial {i} M={1 << m} {variant} node {k}")
    return Result("exit_broadcast_harmless", True)


def check_composite(trials=30) -> Result:
    rng = np.random.default_rng(7)
    for M in (12, 18, 24, 36):
        for plan in spectral.enumerate_plans(M)[:3]:
            sizes = plan.admissible_sizes()
            for _ in range(trials):
                reqs, left = [], M
                for n in rng.permutation(sizes):
                    if n <= left and rng.random() < 0.6:
                        reqs.append(int(n))
                        left -= int(n)
                if not reqs:
                    continue
                prof = RequestProfile([(f"n{i}", n) for i, n in enumerate(reqs)], plan)
                allocs = allocate_composite(prof)
                blocks = {n: _cvec(rng, c) for n, c in prof.requests}
                y = unified_multiplex(blocks, build_schedule(allocs, plan, "transmit"))
                err = float(np.max(np.abs(y - tx_aggregate(blocks, allocs, M))))
                a = unified_detect(fft(y, plan), build_schedule(allocs, plan, "with-fde"))
                b = unified_detect_nofde(y, build_schedule(allocs, plan, "no-fde"))
                err = max(err, _max_block_err(a, blocks), _max_block_err(b, blocks))
                if err > TOL:
                    return Result("composite_size_transceiver", False, f"plan {plan.factors} requests {reqs} err {err:.3g}")
    return Result("composite_size_transceiver", True)


SCOPES: dict[str, list[Callable[[], Result]]] = {
    "spectral": [check_fft_oracle, check_permutations, check_stage_undo, check_multiply_count],
    "prop2": [check_prop2],
    "allocation": [check_allocation_exhaustive, check_allocation_examples],
    "transceiver": [check_transmitters, check_detectors, check_worked_scenario, check_contamination,
                    check_composite],
}


def run_suite(scope: str = "all") -> list[Result]:
    if scope == "all":
        checks = list(itertools.chain.from_iterable(SCOPES.values()))
    elif scope in SCOPES:
        checks = SCOPES[scope]
    else:
        raise ValueError(f"unknown scope {scope!r}; choose all or one of {sorted(SCOPES)}")
    results = []
    for check in checks:
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failure with the exception as counterexample
            results.append(Result(check.__name__.removeprefix("check_"), False, f"{type(exc).__name__}: {exc}"))
    return results
