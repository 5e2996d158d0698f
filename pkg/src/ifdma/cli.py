"""Command-line front end: ``ifdma {verify,allocate,papr,ber,complexity}``.

Experiments read an INI file with a ``[papr]`` and/or ``[ber]`` section.
Every key is optional; missing keys fall back to the documented defaults
(M=16, QPSK, RRC beta 0.5 over 20 symbols, 10x oversampling, 10 symbols of
20 samples per packet, 10,000 packets).  All randomness derives from
``--seed`` (default 20240601).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import subprocess
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import AllocationError, RequestProfile, allocate, allocate_composite
from .complexity import (
    Scenario,
    count,
    log2_exact,
    multi_bank_closed_form,
    multi_bank_exact,
    render_comparison,
    render_table,
    single_bank_exact,
)
from .spectral import DecompositionPlan
from .unified import build_schedule
from .verify import SCOPES, run_suite
from .waveform import SCHEMES, ExperimentConfig, papr_at_probability, qpsk_ber_theory, run_ber, run_ccdf

DEFAULT_SEED = 20240601
SECTIONS = ("papr", "ber")

# keys of ExperimentConfig settable from a config file
_SCALAR_KEYS = {
    "M": int, "rrc_beta": float, "rrc_span_symbols": int, "oversample": int,
    "ofdm_symbols_per_packet": int, "samples_per_ofdm_symbol_with_cp": int, "packets": int,
    "stream_power": str, "pulse": str, "min_bit_errors": int, "max_packets": int,
    "chunk_packets": int, "ccdf_min_db": float, "ccdf_max_db": float, "ccdf_step_db": float,
}
_KEYS = set(_SCALAR_KEYS) | {"N", "schemes", "clipping_alpha", "snr_db_grid"}
_SECTION_DEFAULTS = {
    "papr": {"N": (4, 5, 7)},
    # equal energy per subcarrier so every stream sees the same SNR
    "ber": {"N": (4,), "stream_power": "per_subcarrier"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Sweep:
    """One config section: a base experiment swept over schemes and loads."""

    section: str
    schemes: tuple[str, ...]
    N_values: tuple[int, ...]
    base: ExperimentConfig

    def experiments(self):
        for scheme in self.schemes:
            for N in self.N_values:
                yield self.base.replace(scheme=scheme, N=N)


def _split(value: str) -> list[str]:
    return [v for v in (p.strip() for p in value.replace(",", " ").split()) if v]


def parse_config(text: str, seed: int = DEFAULT_SEED) -> dict[str, Sweep]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    unknown_sections = [s for s in cp.sections() if s not in SECTIONS]
    if unknown_sections:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown_sections)}")
    sweeps = {}
    for name in cp.sections():
        sec = cp[name]
        unknown = sorted(set(sec) - _KEYS)
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
        defaults = _SECTION_DEFAULTS[name]
        kw = {k: v for k, v in defaults.items() if k != "N"}
        try:
            for key, conv in _SCALAR_KEYS.items():
                if key in sec:
                    kw[key] = conv(sec[key].strip())
            N_values = tuple(int(v) for v in _split(sec["N"])) if "N" in sec else defaults["N"]
            schemes = tuple(_split(sec["schemes"])) if "schemes" in sec else SCHEMES
            alpha = sec.get("clipping_alpha", "").strip()
            kw["clipping_alpha"] = float(alpha) if alpha and alpha.lower() != "none" else None
            if "snr_db_grid" in sec:
                kw["snr_db_grid"] = tuple(float(v) for v in _split(sec["snr_db_grid"]))
        except ValueError as exc:
            raise ConfigError(f"bad value in [{name}]: {exc}") from exc
        if not N_values or not schemes:
            raise ConfigError(f"[{name}] needs at least one N and one scheme")
        bad = [s for s in schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s) in [{name}]: {', '.join(bad)}; choose from {', '.join(SCHEMES)}")
        if name == "ber" and len(N_values) != 1:
            raise ConfigError("[ber] takes a single N")
        try:
            base = ExperimentConfig(N=N_values[0], scheme=schemes[0], master_seed=seed, **kw)
            for N in N_values:
                base.replace(N=N)
        except ValueError as exc:
            raise ConfigError(f"invalid [{name}] settings: {exc}") from exc
        sweeps[name] = Sweep(name, schemes, N_values, base)
    return sweeps


def render_config(sweeps: dict[str, Sweep]) -> str:
    """INI text that :func:`parse_config` turns back into the same sweeps."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for name, sw in sweeps.items():
        b = sw.base
        sec = {"schemes": ", ".join(sw.schemes), "N": ", ".join(str(n) for n in sw.N_values)}
        for key in _SCALAR_KEYS:
            sec[key] = repr(getattr(b, key)) if isinstance(getattr(b, key), float) else str(getattr(b, key))
        sec["clipping_alpha"] = "none" if b.clipping_alpha is None else repr(b.clipping_alpha)
        sec["snr_db_grid"] = ", ".join(repr(s) for s in b.snr_db_grid)
        cp[name] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _config_echo(sw: Sweep) -> dict:
    d = dataclasses.asdict(sw.base)
    d.pop("scheme")
    d.pop("N")
    d["schemes"] = list(sw.schemes)
    d["N"] = list(sw.N_values)
    d["snr_db_grid"] = list(d["snr_db_grid"])
    return d


def version_string() -> str:
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=Path(__file__).resolve().parent, timeout=5).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else __version__


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out: Path, manifest: dict) -> None:
    for f in manifest.get("outputs", []):
        p = out / f
        if not p.is_file() or p.stat().st_size == 0:
            raise RuntimeError(f"output {p} is missing or empty")
    manifest["finished"] = _now()
    (out / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_sweep(args, section: str) -> tuple[Sweep, str]:
    text = Path(args.config).read_text() if args.config else ""
    sweeps = parse_config(text, args.seed)
    if section not in sweeps:
        sweeps[section] = parse_config(f"[{section}]\n", args.seed)[section]
    return sweeps[section], render_config({section: sweeps[section]})


def _manifest(cmd: str, args, sweep: Sweep | None = None, ini: str | None = None) -> dict:
    m = {"command": cmd, "master_seed": args.seed, "version": version_string(), "started": _now(),
         "workers": args.workers, "outputs": []}
    if sweep is not None:
        m["config"] = {sweep.section: _config_echo(sweep)}
        m["config_ini"] = ini
    return m


# -- subcommands ----------------------------------------------------------------------

def cmd_verify(args) -> int:
    results = run_suite(args.scope)
    width = max(len(r.name) for r in results)
    for r in results:
        line = f"{'PASS' if r.ok else 'FAIL'}  {r.name:<{width}}"
        if not r.ok:
            line += f"  counterexample: {r.detail}"
        print(line)
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} properties passed")
    return 1 if failed else 0


def _parse_requests(items: list[str]) -> list[tuple[str, int]]:
    reqs = []
    for i, item in enumerate(items):
        if "=" in item:
            name, n = item.split("=", 1)
        else:
            name, n = (chr(ord("A") + i) if i < 26 else f"n{i}"), item
        reqs.append((name, int(n)))
    return reqs


def cmd_allocate(args) -> int:
    M = args.M
    reqs = _parse_requests(args.requests)
    if args.factors:
        plan = DecompositionPlan(tuple(int(f) for f in _split(args.factors)))
        if plan.m_total != M:
            raise AllocationError(f"factors {plan.factors} multiply to {plan.m_total}, not M={M}")
    else:
        plan = DecompositionPlan.for_size(M)
    prof = RequestProfile(reqs, plan)
    allocs = allocate(prof, args.order) if plan.is_radix2 else allocate_composite(prof, order=args.order)
    sched = build_schedule(allocs, plan, "with-fde")
    rows = [[a.node_id, a.size, f"{a.bins.start}-{a.bins.stop - 1}", " ".join(map(str, a.subcarriers)),
             a.d, sched.stream_stage(a), plan.stage_count - sched.stream_stage(a)] for a in allocs]
    header = ["node", "size", "bins", "subcarriers", "d", "exit_stage_idft", "exit_stage_dft"]
    print(f"M={M} plan={plan.factors} order={args.order}")
    print("| " + " | ".join(header) + " |")
    print("|" + "---|" * len(header))
    for r in rows:
        print("| " + " | ".join(str(c) for c in r) + " |")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "allocation.csv", header, rows)
        man = _manifest("allocate", args)
        man["requests"] = reqs
        man["outputs"] = ["allocation.csv"]
        _write_manifest(out, man)
    return 0


def cmd_complexity(args) -> int:
    for M in args.M:
        log2_exact(M)
    header = ["M", "tx_freq_ul_exact", "tx_freq_ul_approx", "multi_bank_exact", "multi_bank_closed_form",
              "multi_bank_tabulated", "unified", "switches", "switches_alt",
              "ratio_multi_dl_tx", "ratio_multi_dl_rx_nofde", "ratio_multi_dl_rx_fde"]
    rows = []
    for M in args.M:
        tx = count(Scenario("Single", "UL", "TX-freq"), M)
        conv = count(Scenario("Multi", "DL", "RX-conventional"), M)
        uni = count(Scenario("Multi", "DL", "Unified-TX"), M)
        fde = count(Scenario("Multi", "DL", "Unified-with-FDE"), M)
        conv_tx = min(count(Scenario("Multi", "DL", r), M).exact_multipliers for r in ("TX-time", "TX-freq"))
        rows.append([M, single_bank_exact(M), tx.approx_formula_value, multi_bank_exact(M),
                     multi_bank_closed_form(M), conv.approx_formula_value, uni.exact_multipliers,
                     uni.switch_count, uni.switch_count_alt, round(conv_tx / uni.exact_multipliers, 4),
                     round(conv.exact_multipliers / uni.exact_multipliers, 4),
                     round(conv.exact_multipliers / fde.exact_multipliers, 4)])
    fmt = args.format
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if fmt == "csv":
        w.writerow(header)
        w.writerows(rows)
        print(buf.getvalue(), end="")
    else:
        print("| " + " | ".join(header) + " |")
        print("|" + "---|" * len(header))
        for r in rows:
            print("| " + " | ".join(str(c) for c in r) + " |")
    print()
    for t in (1, 3, 4, 5):
        print(render_table(t, fmt=fmt))
    print(render_comparison(args.M, fmt=fmt))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "complexity.csv", header, rows)
        (out / "complexity_comparison.csv").write_text(render_comparison(args.M, fmt="csv"))
        man = _manifest("complexity", args)
        man["M"] = list(args.M)
        man["outputs"] = ["complexity.csv", "complexity_comparison.csv"]
        _write_manifest(out, man)
    return 0


def cmd_papr(args) -> int:
    sweep, ini = _load_sweep(args, "papr")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest("papr", args, sweep, ini)
    summary = {}
    for cfg in sweep.experiments():
        for curve in run_ccdf(cfg, workers=args.workers):
            name = f"ccdf_{cfg.scheme}_N{cfg.N}{'_clipped' if curve.clipped else ''}.csv"
            _write_csv(out / name, ["threshold_db", "prob"], zip(curve.thresholds_db, curve.probability))
            man["outputs"].append(name)
            summary[name] = {"papr_999_db": papr_at_probability(curve), "packets": int(curve.papr_db.size)}
            if curve.clipped:
                summary[name]["clipped_samples"] = curve.clipped_samples
            print(f"{name:<36} PAPR at 1e-3: {summary[name]['papr_999_db']:6.2f} dB")
    man["summary"] = summary
    _write_manifest(out, man)
    return 0


def cmd_ber(args) -> int:
    sweep, ini = _load_sweep(args, "ber")
    if not sweep.base.snr_db_grid:
        raise ConfigError("snr_db_grid is empty")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = _manifest("ber", args, sweep, ini)
    man["snr_definition"] = ("Eb/N0 in dB; Eb is the useful (CP-free) energy per bit, noise added at the "
                             "oversampled rate and referred to the matched-filter output")
    summary = {}
    for cfg in sweep.experiments():
        for curve in run_ber(cfg, workers=args.workers):
            name = f"ber_{cfg.scheme}{'_clipped' if curve.clipped else ''}.csv"
            _write_csv(out / name, ["snr_db", "ber", "bit_errors", "bits"],
                       zip(curve.snr_db, curve.ber, curve.bit_errors.tolist(), curve.bits.tolist()))
            man["outputs"].append(name)
            summary[name] = {"ber": curve.ber.tolist(), "theory": qpsk_ber_theory(curve.snr_db).tolist()}
            print(f"{name:<28} " + "  ".join(f"{s:g}dB:{b:.3g}" for s, b in zip(curve.snr_db, curve.ber)))
    man["summary"] = summary
    _write_manifest(out, man)
    return 0


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [papr] / [ber] sections")
    common.add_argument("--seed", type=_u64, default=DEFAULT_SEED, metavar="U64",
                        help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--workers", type=_positive, default=1, metavar="N", help="worker processes")
    common.add_argument("--out", metavar="DIR", default=None, help="output directory (default ./results)")

    p = argparse.ArgumentParser(prog="ifdma", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the property suites")
    v.add_argument("scope", nargs="?", default="all", choices=["all", *SCOPES])
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("allocate", parents=[common], help="bin / subcarrier allocation for a request set")
    a.add_argument("--M", type=int, required=True)
    a.add_argument("requests", nargs="+", help="counts, or NAME=COUNT")
    a.add_argument("--order", choices=["descending", "ascending", "arrival"], default="descending")
    a.add_argument("--factors", help="radix factors for composite M, e.g. 2,3,2")
    a.set_defaults(func=cmd_allocate)

    c = sub.add_parser("complexity", parents=[common], help="multiplier counts and ratio tables")
    c.add_argument("M", type=int, nargs="+")
    c.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    c.set_defaults(func=cmd_complexity)

    for name, fn, text in (("papr", cmd_papr, "PAPR CCDF curves"), ("ber", cmd_ber, "BER curves over AWGN")):
        e = sub.add_parser(name, parents=[common], help=text)
        e.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("papr", "ber") and args.out is None:
        args.out = "results"
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # config, allocation and file errors are usage errors
        parser.error(f"{args.command}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
