import numpy as np
import pytest
import yaml

from nsyk.cli import main
from nsyk.couplings import CouplingRealization
from nsyk.io import read_csv, read_record


def test_sample_to_stdout(capsys):
    assert main(["sample", "--n", "8", "--p", "0.5", "--seed", "1"]) == 0
    text = capsys.readouterr().out
    c = CouplingRealization.from_text(text)
    assert c.config.N == 8 and c.config.p == 0.5
    assert 0 < len(c) <= 70


def test_spectrum_binary_and_csv(tmp_path, capsys):
    assert main(["spectrum", "--n", "10", "--index", "3", "--out", str(tmp_path / "s.bin")]) == 0
    spec = read_record(tmp_path / "s.bin")
    assert len(spec) == 16 and spec.source_config.realization_index == 3
    assert main(["spectrum", "--n", "10", "--index", "3", "--out", str(tmp_path / "s.csv")]) == 0
    cols, meta = read_csv(tmp_path / "s.csv")
    np.testing.assert_array_equal(cols["sigma"], spec.values)
    assert meta["index"] == 3


def test_run_from_config_echoes_manifest(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"N": [8, 10], "p": [1.0, 0.5], "n_realizations": 2, "master_seed": 7}))
    out = tmp_path / "store"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    echoed = yaml.safe_load(printed.split("content_hash")[0])["resolved_manifest"]
    assert echoed["N"] == [8, 10] and echoed["master_seed"] == 7
    assert len(list(out.rglob("*.bin"))) == 8
    first_hash = printed.split("content_hash: ")[1].strip()
    assert main(["run", "--config", str(cfg), "--out", str(out), "--resume"]) == 0
    assert capsys.readouterr().out.split("content_hash: ")[1].strip() == first_hash


def test_rstat_and_hist(tmp_path, capsys):
    assert main(["rstat", "--n", "12", "--samples", "10", "--out", str(tmp_path / "r.csv")]) == 0
    assert "<r_sigma>=" in capsys.readouterr().out
    cols, meta = read_csv(tmp_path / "r.csv")
    assert np.all((cols["r"] >= 0) & (cols["r"] <= 1))
    assert meta["N"] == 12 and meta["n_realizations"] == 10
    assert main(["rstat", "--n", "10", "12", "--samples", "5", "--out", str(tmp_path / "many.csv")]) == 0
    cols, _ = read_csv(tmp_path / "many.csv")
    assert cols["N"].tolist() == [10, 12]
    assert main(["hist", "--n", "12", "--samples", "10", "--out", str(tmp_path / "h.csv")]) == 0
    cols, _ = read_csv(tmp_path / "h.csv")
    assert set(cols) == {"bin_lo", "bin_hi", "density"}


def test_rstat_from_store(tmp_path, capsys):
    store = tmp_path / "store"
    assert main(["run", "--n", "10", "--samples", "4", "--out", str(store)]) == 0
    capsys.readouterr()
    assert main(["rstat", "--n", "10", "--samples", "4", "--store", str(store)]) == 0
    from_store = capsys.readouterr().out
    assert main(["rstat", "--n", "10", "--samples", "4"]) == 0
    assert capsys.readouterr().out == from_store
    assert main(["rstat", "--n", "10", "--samples", "5", "--store", str(store)]) == 2


def test_sff_and_complexity(tmp_path, capsys):
    out = tmp_path / "sff.csv"
    assert main(["sff", "--n", "10", "--samples", "4", "--points", "60", "--t-max", "1e4", "--out", str(out)]) == 0
    cols, meta = read_csv(out)
    assert len(cols["t"]) == 60 and cols["sigma_ff"][0] > 0.999
    assert (tmp_path / "sff.json").exists() and meta["alpha"] > 0
    out = tmp_path / "c.csv"
    assert main(["complexity", "--n", "10", "--samples", "3", "--linear", "--t-min", "0", "--t-max", "5",
                 "--points", "11", "--out", str(out)]) == 0
    cols, meta = read_csv(out)
    assert cols["C"][0] == 0.0 and meta["plateau"] > 0


def test_pcrit_and_rmt_ref(tmp_path, capsys):
    out = tmp_path / "pc"
    assert main(["pcrit", "--n", "8", "10", "12", "--p", "1", "0.3", "0.1", "0.05", "0.02",
                 "--samples", "10", "--out", str(out)]) == 0
    assert "k = " in capsys.readouterr().out
    cols, meta = read_csv(out / "pcrit_fit.csv")
    assert cols["N"].tolist() == [8, 10, 12] and "poor_fit" in meta
    cols, meta = read_csv(out / "scan_N12.csv")
    assert cols["p"][0] == 1.0 and 0 < meta["p_crit"] < 1
    assert main(["rmt-ref", "--ensemble", "GUE", "--dim", "64", "--samples", "5",
                 "--out", str(tmp_path / "gue.csv")]) == 0
    assert "GUE dim=64" in capsys.readouterr().out


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit):
        main(["rstat", "--sector", "3"])
    with pytest.raises(SystemExit):
        main(["frobnicate"])
