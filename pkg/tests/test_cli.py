import json

import numpy as np
import pytest

from ifdma import cli, spectral
from ifdma.waveform import ExperimentConfig


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_verify_all(capsys):
    code, out = run(capsys, "verify")
    assert code == 0
    assert "FAIL" not in out


def test_verify_prop2(capsys):
    code, out = run(capsys, "verify", "prop2")
    assert code == 0 and "PASS  embedded_transform_inputs" in out


def test_verify_unknown_scope(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["verify", "nonsense"])
    assert e.value.code == 2


def test_verify_catches_corrupted_twiddle(capsys, monkeypatch):
    orig = spectral._twiddles
    monkeypatch.setattr(spectral, "_twiddles", lambda size, radix, sign: np.conj(orig(size, radix, sign)))
    spectral._stage_tables.cache_clear()
    try:
        code, out = run(capsys, "verify", "spectral")
    finally:
        monkeypatch.undo()
        spectral._stage_tables.cache_clear()
    assert code != 0
    assert "FAIL  fft_matches_naive_dft" in out and "counterexample" in out


def test_allocate_table2(capsys):
    code, out = run(capsys, "allocate", "--M", "8", "4", "2", "1")
    assert code == 0
    assert "| A | 4 | 0-3 | 0 2 4 6 |" in out
    assert "| B | 2 | 4-5 | 1 5 |" in out
    assert "| C | 1 | 6-6 | 3 |" in out


def test_allocate_composite(capsys):
    code, out = run(capsys, "allocate", "--M", "12", "--factors", "2,3,2", "--order", "ascending",
                    "A=6", "B=2", "C=1")
    assert "1 3 5 7 9 11" in out and "| 2 8 |" in out


def test_allocate_infeasible(capsys):
    with pytest.raises(SystemExit):
        cli.main(["allocate", "--M", "8", "8", "1"])


def test_complexity(capsys, tmp_path):
    code, out = run(capsys, "complexity", "16", "64", "1024", "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "complexity.csv").read_text().splitlines()
    assert len(lines) == 4
    assert lines[1].startswith("16,81,96.0,112,")
    man = json.loads((tmp_path / "run.json").read_text())
    assert man["outputs"] == ["complexity.csv", "complexity_comparison.csv"]


def test_complexity_bad_m():
    with pytest.raises(SystemExit):
        cli.main(["complexity", "12"])


def test_config_unknown_keys():
    with pytest.raises(cli.ConfigError, match="bogus, other"):
        cli.parse_config("[papr]\nbogus = 1\nother = 2\n")
    with pytest.raises(cli.ConfigError):
        cli.parse_config("[plot]\n")


def test_config_defaults():
    sw = cli.parse_config("[papr]\n", seed=5)["papr"]
    assert sw.N_values == (4, 5, 7)
    assert sw.base == ExperimentConfig(N=4, master_seed=5)
    assert len(list(sw.experiments())) == 9
    assert cli.parse_config("[ber]\n")["ber"].base.stream_power == "per_subcarrier"


def test_config_round_trip():
    text = ("[papr]\nM = 128\nN = 65, 127\nsamples_per_ofdm_symbol_with_cp = 160\nclipping_alpha = 2\n"
            "schemes = lfdma ofdma\n[ber]\nN = 7\nsnr_db_grid = 0, 1.5, 3\nrrc_beta = 0.35\n")
    sweeps = cli.parse_config(text, seed=99)
    assert cli.parse_config(cli.render_config(sweeps), seed=99) == sweeps


def test_ber_empty_grid(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[ber]\nsnr_db_grid =\n")
    with pytest.raises(SystemExit) as e:
        cli.main(["ber", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert e.value.code == 2


def test_ber_outputs(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[ber]\nN = 2\nschemes = ofdma\nsnr_db_grid = 0\nmax_packets = 30\nchunk_packets = 10\n"
                   "clipping_alpha = 1.5\n")
    code, _ = run(capsys, "ber", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    lines = (tmp_path / "o" / "ber_ofdma_clipped.csv").read_text().splitlines()
    assert lines[0] == "snr_db,ber,bit_errors,bits"
    man = json.loads((tmp_path / "o" / "run.json").read_text())
    assert set(man["outputs"]) == {"ber_ofdma.csv", "ber_ofdma_clipped.csv"}
    assert "Eb/N0" in man["snr_definition"]


def test_papr_manifest_round_trip(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[papr]\nN = 4\npackets = 30\nclipping_alpha = 2\nschemes = lfdma\n")
    code, _ = run(capsys, "papr", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "7")
    assert code == 0
    out = tmp_path / "o"
    assert sorted(p.name for p in out.iterdir()) == ["ccdf_lfdma_N4.csv", "ccdf_lfdma_N4_clipped.csv", "run.json"]
    man = json.loads((out / "run.json").read_text())
    assert man["master_seed"] == 7
    again = cli.parse_config(man["config_ini"], seed=man["master_seed"])
    assert again == cli.parse_config(cfg.read_text(), seed=7)
    assert man["config"]["papr"]["packets"] == 30
    for f in man["outputs"]:
        assert (out / f).stat().st_size > 0


def test_papr_reruns_identical(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[papr]\nN = 5\npackets = 80\nchunk_packets = 20\n")
    for name, w in (("a", "1"), ("b", "4")):
        run(capsys, "papr", "--config", str(cfg), "--out", str(tmp_path / name), "--workers", w)
    for f in ("ccdf_multi_ifdma_N5.csv", "ccdf_lfdma_N5.csv", "ccdf_ofdma_N5.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_bad_seed():
    with pytest.raises(SystemExit):
        cli.main(["papr", "--seed", "-1"])
