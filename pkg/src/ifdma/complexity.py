"""Complex-multiplier counts for conventional and unified IFDMA transceivers.

Counts are static hardware counts: the number of multipliers a design has to
deploy, with ``(N/2)·log2 N`` for an ``N``-point radix-2 transform.  Every
count is given both as an exact sum and as the closed-form approximation used
in the usual tabulations, so the two can be compared.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Scenario",
    "ComplexityReport",
    "ComparisonRow",
    "log2_exact",
    "fft_multipliers",
    "single_bank_exact",
    "multi_bank_exact",
    "multi_bank_closed_form",
    "count",
    "compare",
    "render_table",
    "render_comparison",
    "FOOTNOTES",
]

SYSTEMS = ("Single", "Multi")
LINKS = ("UL", "DL")
ROLES = ("TX-time", "TX-freq", "RX-conventional", "Unified-with-FDE", "Unified-no-FDE", "Unified-TX")
UNIFIED_ROLES = ("Unified-with-FDE", "Unified-no-FDE", "Unified-TX")


@dataclass(frozen=True)
class Scenario:
    system: str
    link: str
    role: str

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}")
        if self.link not in LINKS:
            raise ValueError(f"link must be one of {LINKS}")
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")


@dataclass(frozen=True)
class ComplexityReport:
    scenario: Scenario
    M: int
    exact_multipliers: int
    approx_formula: str
    approx_formula_value: float
    switch_count: int | None = None
    switch_count_alt: int | None = None  # the halved count quoted alongside it

    @property
    def approx_error(self) -> float:
        """Relative gap between the closed form and the exact sum."""
        return (self.approx_formula_value - self.exact_multipliers) / self.exact_multipliers


def log2_exact(M: int) -> int:
    if isinstance(M, bool) or not isinstance(M, int) or M < 2 or M & (M - 1):
        raise ValueError(f"M must be a power of 2 and at least 2, got {M!r}")
    return M.bit_length() - 1


def fft_multipliers(N: int) -> int:
    """Multipliers of one ``N``-point radix-2 transform, ``(N/2)·log2 N``."""
    if N == 1:
        return 0
    return N // 2 * log2_exact(N)


def single_bank_exact(M: int) -> int:
    """One transform of every size 2..M plus the ``M``-point transform.

    ``sum_n (2^(n-1)·n) + (M/2)·m``, which collapses to ``(m-1)·M + 1 + M·m/2``.
    """
    m = log2_exact(M)
    return sum((1 << (n - 1)) * n for n in range(1, m + 1)) + fft_multipliers(M)


def multi_bank_exact(M: int) -> int:
    """``M/2^n`` transforms of each size ``2^n`` plus the ``M``-point transform."""
    m = log2_exact(M)
    return sum((M >> n) * (1 << (n - 1)) * n for n in range(1, m + 1)) + fft_multipliers(M)


def multi_bank_closed_form(M: int) -> float:
    """Closed form of :func:`multi_bank_exact`: ``M·m²/4 + 3·M·m/4``."""
    m = log2_exact(M)
    return M * m * m / 4 + 3 * M * m / 4


# (formula label, value as a function of M and m)
_APPROX = {
    "M": lambda M, m: float(M),
    "M^2": lambda M, m: float(M * M),
    "3/2 M log2 M": lambda M, m: 1.5 * M * m,
    "M log2 M + 1/2 M log2 M": lambda M, m: M * m + 0.5 * M * m,
    "1/4 M log2^2 M + 1/2 M log2 M": lambda M, m: 0.25 * M * m * m + 0.5 * M * m,
    "1/2 M log2 M + 1/2 M log2 M": lambda M, m: float(M * m),
    "1/2 M log2 M": lambda M, m: 0.5 * M * m,
}


def _entry(sc: Scenario, M: int) -> tuple[int, str]:
    single = sc.system == "Single"
    if sc.role == "TX-time":
        if single and sc.link == "UL":
            return M, "M"
        return M * M, "M^2"
    if sc.role == "TX-freq":
        if single and sc.link == "UL":
            return single_bank_exact(M), "3/2 M log2 M"
        return multi_bank_exact(M), "1/4 M log2^2 M + 1/2 M log2 M"
    if sc.role == "RX-conventional":
        if single and sc.link == "DL":
            # the receiving end node decodes one stream of unknown size
            return single_bank_exact(M), "M log2 M + 1/2 M log2 M"
        return multi_bank_exact(M), "1/4 M log2^2 M + 1/2 M log2 M"
    if sc.role == "Unified-with-FDE":
        return 2 * fft_multipliers(M), "1/2 M log2 M + 1/2 M log2 M"
    return fft_multipliers(M), "1/2 M log2 M"


def count(scenario: Scenario, M: int) -> ComplexityReport:
    m = log2_exact(M)
    exact, label = _entry(scenario, M)
    switches = alt = None
    if scenario.role in UNIFIED_ROLES:
        switches = M * (m + 1)
        alt = M * (m + 1) // 2
    return ComplexityReport(scenario, M, exact, label, _APPROX[label](M, m), switches, alt)


@dataclass(frozen=True)
class ComparisonRow:
    M: int
    system: str
    link: str
    unified_role: str
    conventional: int  # cheapest conventional design for the same job
    unified: int
    ratio: float
    bound: float  # log2(M) / 3

    @property
    def meets_bound(self) -> bool:
        return self.ratio >= self.bound


def compare(M_list: Iterable[int]) -> list[ComparisonRow]:
    """Conventional over unified multiplier ratios for every scenario and ``M``.

    Transmitters are compared against the cheaper of the time- and
    frequency-domain designs; both unified receivers against the
    conventional receiver.
    """
    rows = []
    for M in M_list:
        m = log2_exact(M)
        for system in SYSTEMS:
            for link in LINKS:
                tx = min(count(Scenario(system, link, r), M).exact_multipliers for r in ("TX-time", "TX-freq"))
                rx = count(Scenario(system, link, "RX-conventional"), M).exact_multipliers
                for role, conv in (("Unified-with-FDE", rx), ("Unified-no-FDE", rx), ("Unified-TX", tx)):
                    uni = count(Scenario(system, link, role), M).exact_multipliers
                    rows.append(ComparisonRow(M, system, link, role, conv, uni, conv / uni, m / 3))
    return rows


FOOTNOTES = {
    "a": "3/2 M log2 M approximates sum_n 2^(n-1) n + (M/2) log2 M = (m-1)M + 1 + Mm/2; "
         "it overshoots by M - 1, a relative gap that shrinks like 1/log2 M.",
    "b": "the exact sum sum_n (M/2^n) 2^(n-1) n + (M/2) log2 M equals 1/4 M log2^2 M + 3/4 M log2 M; "
         "the tabulated 1/4 M log2^2 M + 1/2 M log2 M is short by 1/4 M log2 M.",
    "c": "M log2 M + 1/2 M log2 M is the same value as 3/2 M log2 M, written as one M-point "
         "transform plus a bank of smaller ones.",
    "d": "switches: one 2x2 element per line per tap point gives M(log2 M + 1); "
         "the halved count 1/2 M(log2 M + 1) is also quoted and listed as 'alt'.",
}

_TABLES = {
    1: ("Conventional transceivers, Single-IFDMA",
        ["TX-time", "TX-freq", "RX-conventional"],
        [("Single", "UL"), ("Single", "DL")]),
    3: ("Conventional transceivers, Multi-IFDMA",
        ["TX-time", "TX-freq", "RX-conventional"],
        [("Multi", "UL"), ("Multi", "DL")]),
    4: ("Receivers",
        ["RX-conventional", "Unified-with-FDE", "Unified-no-FDE"],
        [("Single", "UL"), ("Single", "DL"), ("Multi", "UL"), ("Multi", "DL")]),
    5: ("Transmitters",
        ["TX-time", "TX-freq", "Unified-TX"],
        [("Single", "UL"), ("Single", "DL"), ("Multi", "UL"), ("Multi", "DL")]),
}


def _notes_for(label: str) -> str:
    marks = {"3/2 M log2 M": "a", "1/4 M log2^2 M + 1/2 M log2 M": "b", "M log2 M + 1/2 M log2 M": "c"}
    return marks.get(label, "")


def _table_rows(table: int, M: int | None) -> tuple[str, list[str], list[list[str]], list[str]]:
    if table not in _TABLES:
        raise ValueError(f"table must be one of {sorted(_TABLES)}")
    title, roles, rows = _TABLES[table]
    header = ["system", "link"] + roles
    body, used = [], set()
    for system, link in rows:
        cells = [system, link]
        for role in roles:
            probe = count(Scenario(system, link, role), M or 2)
            mark = _notes_for(probe.approx_formula)
            if mark:
                used.add(mark)
            text = probe.approx_formula + (f" [{mark}]" if mark else "")
            if M is not None:
                text += f" = {probe.approx_formula_value:g} (exact {probe.exact_multipliers})"
                if probe.switch_count is not None:
                    used.add("d")
                    text += f", switches {probe.switch_count} (alt {probe.switch_count_alt}) [d]"
            cells.append(text)
        body.append(cells)
    return title, header, body, [f"[{k}] {FOOTNOTES[k]}" for k in sorted(used)]


def _emit(header: Sequence[str], body: Sequence[Sequence], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in body]
        return "\n".join(lines) + "\n"
    raise ValueError("fmt must be 'csv' or 'markdown'")


def render_table(table: int, M: int | None = None, fmt: str = "markdown") -> str:
    """One of the tables 1, 3, 4, 5; with ``M`` the cells also carry numbers."""
    title, header, body, notes = _table_rows(table, M)
    head = f"Table {table}: {title}" + (f" (M={M})" if M is not None else "")
    out = _emit(header, body, fmt)
    if fmt == "markdown":
        return f"**{head}**\n\n{out}" + ("\n" + "\n".join(notes) + "\n" if notes else "")
    return f"# {head}\n{out}" + "".join(f"# {n}\n" for n in notes)


def render_comparison(M_list: Iterable[int], fmt: str = "markdown") -> str:
    rows = compare(M_list)
    header = ["M", "system", "link", "unified", "conventional", "unified_count", "ratio", "log2M/3", "meets"]
    body = [[r.M, r.system, r.link, r.unified_role, r.conventional, r.unified,
             f"{r.ratio:.4f}", f"{r.bound:.4f}", "yes" if r.meets_bound else "no"] for r in rows]
    return _emit(header, body, fmt)
