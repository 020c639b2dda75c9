"""CLI round trips, output formats, exit codes, thread determinism."""

import json
import math
import os

import numpy as np
import pytest

from schroeder_lab.cli import main

Z2_JSON = {"num": [[0, 0], [0, 0], [1, 0]]}


@pytest.fixture()
def z2_map(tmp_path):
    p = tmp_path / "z2.json"
    p.write_text(json.dumps(Z2_JSON))
    return str(p)


def test_coeffs_exp(z2_map, tmp_path):
    out = tmp_path / "c.json"
    assert main(["coeffs", "--map", z2_map, "--z0", "1,0", "--order-n", "30",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["z0"] == [1.0, 0.0]
    assert doc["lambda"] == [2.0, 0.0]
    coeffs = [complex(a, b) for a, b in doc["coeffs"]]
    for n_, c in enumerate(coeffs):
        assert abs(c - 1.0 / math.factorial(n_)) < 1e-12
    assert doc["r_safe"] > 1.0


def test_eval_at_zero(z2_map, tmp_path, capsys):
    assert main(["eval", "--map", z2_map, "--z0", "1,0", "--w", "0,0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["value"] == [1.0, 0.0]
    assert doc["depth"] == 0


def test_ply_report(z2_map, tmp_path):
    out = tmp_path / "ply.json"
    assert main(["ply", "--map", z2_map, "--z0", "1,0", "--grid", "160",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["q_inf"] == 1
    assert doc["lhs"] == 1.0
    assert doc["rhs"] == 2.0
    assert doc["slack"] == 1.0
    assert doc["el"] is True
    assert not doc["violation"]


def test_cover_exit_codes(z2_map, tmp_path):
    assert main(["cover", "--map", z2_map, "--z0", "1,0", "--value", "0,0",
                 "--grid", "160", "--out", str(tmp_path / "c0.json")]) == 0
    doc = json.loads((tmp_path / "c0.json").read_text())
    assert doc["verdict"] == "unbounded-tract-found"
    assert main(["cover", "--map", z2_map, "--z0", "1,0", "--value", "1,0",
                 "--grid", "320", "--box", "8",
                 "--out", str(tmp_path / "c1.json")]) == 0
    doc1 = json.loads((tmp_path / "c1.json").read_text())
    assert doc1["verdict"] == "covers-completely"


def test_malformed_map_is_an_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"num\": [[0,0],[1,0]]}")  # degree 1
    assert main(["coeffs", "--map", str(bad), "--z0", "1,0"]) == 1


def test_budget_validation(z2_map):
    assert main(["render", "--map", z2_map, "--grid", "100000",
                 "--out", "/tmp/never.ppm"]) == 1
    assert main(["sweep", "--cells", "100000"]) == 1


def test_config_file_flags_win(z2_map, tmp_path, capsys):
    cfgf = tmp_path / "cfg.toml"
    cfgf.write_text('order_n = 6\nz0 = "1,0"\n')
    out = tmp_path / "c.json"
    assert main(["coeffs", "--map", z2_map, "--config", str(cfgf),
                 "--order-n", "9", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["coeffs"]) == 10  # flag wins over config


def test_probe_report_schema(z2_map, tmp_path):
    out = tmp_path / "probe.json"
    assert main(["probe", "--map", z2_map, "--value", "0,0", "--k-max", "5",
                 "--grid", "192", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"critical_points", "omega", "mane", "probe"}
    assert doc["probe"]["degrees"] == [2, 4, 8, 16, 32]
    assert doc["mane"] == []


def test_sweep_csv_and_heatmap(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--re-min", "-2.5", "--re-max", "1.5",
                 "--im-min", "-2", "--im-max", "2", "--cells", "32",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "re,im,in_c,escape_iter,hyperbolic,period,mult_abs"
    assert len(lines) == 32 * 32 + 1
    assert (tmp_path / "sweep.csv.ppm").read_bytes()[:2] == b"P6"


def test_render_ppm(z2_map, tmp_path):
    out = tmp_path / "dc.ppm"
    assert main(["render", "--map", z2_map, "--z0", "1,0", "--box", "2",
                 "--grid", "48", "--out", str(out)]) == 0
    data = out.read_bytes()
    assert data.startswith(b"P6\n48 48\n255\n")
    assert len(data) == len(b"P6\n48 48\n255\n") + 48 * 48 * 3


def test_tracts_masks(z2_map, tmp_path):
    out = tmp_path / "t.json"
    assert main(["tracts", "--map", z2_map, "--z0", "1,0", "--value", "0,0",
                 "--grid", "128", "--masks", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["values"][0]["verdicts"] == ["direct"]
    pgm = (tmp_path / "t.json.0.pgm").read_bytes()
    assert pgm.startswith(b"P5\n128 128\n255\n")


@pytest.mark.parametrize(
    "argv,outputs",
    [
        (["coeffs", "--map", "MAP", "--z0", "1,0", "--out", "OUT"], [""]),
        (["eval", "--map", "MAP", "--z0", "1,0", "--w", "2.5,0.5", "--out", "OUT"], [""]),
        (["order", "--map", "MAP", "--z0", "1,0", "--out", "OUT"], [""]),
        (["tracts", "--map", "MAP", "--z0", "1,0", "--value", "0,0",
          "--grid", "96", "--out", "OUT"], [""]),
        (["ply", "--map", "MAP", "--z0", "1,0", "--grid", "96", "--out", "OUT"], [""]),
        (["probe", "--map", "MAP", "--value", "0,0", "--k-max", "4",
          "--grid", "96", "--out", "OUT"], [""]),
        (["cover", "--map", "MAP", "--z0", "1,0", "--value", "0,0",
          "--grid", "96", "--out", "OUT"], [""]),
        (["render", "--map", "MAP", "--z0", "1,0", "--box", "2",
          "--grid", "64", "--out", "OUT"], [""]),
        (["sweep", "--cells", "24", "--out", "OUT"], ["", ".ppm"]),
    ],
)
def test_thread_determinism(z2_map, tmp_path, argv, outputs):
    blobs = {}
    for threads in (1, 4, 8):
        out = tmp_path / f"out{threads}"
        args = [a.replace("MAP", z2_map).replace("OUT", str(out)) for a in argv]
        assert main(args + ["--threads", str(threads)]) == 0
        blobs[threads] = [
            (str(out) + suffix, open(str(out) + suffix, "rb").read()) for suffix in outputs
        ]
    assert blobs[1] == [(p.replace("out1", "out1"), b) for p, b in blobs[1]]
    for threads in (4, 8):
        for (p1, b1), (pt, bt) in zip(blobs[1], blobs[threads]):
            assert b1 == bt, f"{argv[0]}: thread count changed output bytes"


def test_env_thread_default(z2_map, tmp_path, monkeypatch):
    monkeypatch.setenv("SCHRODER_LAB_THREADS", "3")
    out = tmp_path / "c.json"
    assert main(["coeffs", "--map", z2_map, "--z0", "1,0", "--out", str(out)]) == 0
