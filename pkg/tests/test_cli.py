"""End-to-end tests for the latticehide CLI."""
import json

import numpy as np
import pytest

from latticehide.cli import main


def test_info_json(capsys):
    assert main(["info", "--code", "A2:2", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["payload"] == 4
    assert doc["dimension"] == 2
    assert doc["rate_bits_per_dim"] == 1.0
    assert len(doc["representatives"]) == 4
    assert not doc["representatives_truncated"]


def test_info_text(capsys):
    assert main(["info", "--code", "Z:2"]) == 0
    out = capsys.readouterr().out
    assert "payload M   2" in out
    assert "d_0" in out


def test_usage_errors(capsys):
    assert main(["info", "--code", "Foo:2"]) == 1
    assert main(["info"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["--version"]) == 0


def test_embed_extract_round_trip(tmp_path, capsys):
    message = tmp_path / "payload.bin"
    message.write_bytes(b"attack at dawn")
    out = tmp_path / "embedded.csv"
    rc = main(["embed", "--code", "E8:2", "--host", "ecg:4096",
               "--message", str(message), "--method", "mdqim",
               "--out", str(out)])
    assert rc == 0
    assert out.exists()
    meta = json.loads((tmp_path / "embedded.csv.meta.json").read_text())
    assert meta["payload_nbytes"] == 14
    assert meta["bits_per_block"] == 8
    assert meta["blocks_used"] == 14
    assert meta["metrics"]["mse"] >= 0.0

    recovered = tmp_path / "recovered.bin"
    rc = main(["extract", "--in", str(out), "--out", str(recovered)])
    assert rc == 0
    assert recovered.read_bytes() == b"attack at dawn"
    assert "digest match" in capsys.readouterr().out


def test_extract_with_wrong_code_reports_mismatch(tmp_path, capsys):
    message = tmp_path / "payload.bin"
    message.write_bytes(b"0123456789abcdef")
    out = tmp_path / "embedded.csv"
    assert main(["embed", "--code", "Z:2", "--host", "uniform:-8,8,256",
                 "--message", str(message), "--out", str(out)]) == 0
    capsys.readouterr()
    recovered = tmp_path / "wrong.bin"
    assert main(["extract", "--in", str(out), "--out", str(recovered),
                 "--code", "Z:4"]) == 0
    assert "MISMATCH" in capsys.readouterr().out


def test_embed_random_payload_and_figure(tmp_path, capsys):
    out = tmp_path / "embedded.csv"
    fig = tmp_path / "overlay.png"
    rc = main(["embed", "--code", "A2:2", "--host", "ecg:2000",
               "--message", "random:5:40", "--out", str(out),
               "--figure", str(fig)])
    assert rc == 0
    assert fig.stat().st_size > 0
    meta = json.loads((tmp_path / "embedded.csv.meta.json").read_text())
    assert meta["payload_nbytes"] == 40


def test_embed_capacity_exceeded(tmp_path, capsys):
    message = tmp_path / "payload.bin"
    message.write_bytes(bytes(10_000))
    out = tmp_path / "embedded.csv"
    rc = main(["embed", "--code", "Z:2", "--host", "uniform:-8,8,64",
               "--message", str(message), "--out", str(out)])
    assert rc == 2


def test_extract_missing_sidecar(tmp_path, capsys):
    sig = tmp_path / "sig.csv"
    sig.write_text("0.0\n1.0\n")
    rc = main(["extract", "--in", str(sig), "--out", str(tmp_path / "x.bin")])
    assert rc == 2


def test_csv_host_source(tmp_path, capsys):
    host = tmp_path / "host.csv"
    host.write_text("\n".join(repr(float(v)) for v in
                              np.random.default_rng(0).uniform(-4, 4, 128)))
    message = tmp_path / "m.bin"
    message.write_bytes(b"ok")
    out = tmp_path / "e.csv"
    assert main(["embed", "--code", "Z:2", "--host", "csv:" + str(host),
                 "--message", str(message), "--out", str(out)]) == 0
    recovered = tmp_path / "r.bin"
    assert main(["extract", "--in", str(out), "--out", str(recovered)]) == 0
    assert recovered.read_bytes() == b"ok"


def test_simulate_report_to_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = main(["simulate", "--code", "Z:2", "--trials", "5000",
               "--mc-trials", "10000", "--seed", "3", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["methods"]["mdqim"]["mse"] < report["methods"]["qim"]["mse"]
    assert "tightness_flag" in report["theory"]


def test_simulate_sweep_writes_series_and_figure(tmp_path, capsys):
    series = tmp_path / "sweep.csv"
    rc = main(["simulate", "--code", "Z:2", "--trials", "5000",
               "--mc-trials", "10000", "--sweep", "alpha:2,4",
               "--series", str(series)])
    assert rc == 0
    lines = series.read_text().strip().splitlines()
    assert len(lines) == 3  # header + two rows
    assert lines[0].startswith("alpha,")
    figure = tmp_path / "sweep.png"
    assert figure.exists() and figure.stat().st_size > 0


def test_simulate_bad_sweep(tmp_path):
    assert main(["simulate", "--code", "Z:2", "--sweep", "alpha"]) == 1
    assert main(["simulate", "--code", "Z:2", "--sweep", "gamma:1,2"]) == 1


def test_bound_json(capsys):
    rc = main(["bound", "--code", "Z:2", "--epsilon", "0",
               "--mc-trials", "20000"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["qim_mse"] == pytest.approx(1 / 3)
    assert doc["mdqim_mse_bound"] == pytest.approx(1 / 6)
    assert doc["mc_oracle"]["mdqim_mse"] == pytest.approx(1 / 24, rel=0.1)
    assert doc["tightness_flag"] == "bound above oracle"
