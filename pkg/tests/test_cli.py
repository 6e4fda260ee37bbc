import csv
import json
import subprocess
import sys

import pytest

from fdl.cli import main


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fejer_u8(tmp_path):
    assert main(["--out-dir", str(tmp_path), "verify", "fejer", "--n", "8", "--delta", "1"]) == 0
    r = rows(tmp_path / "fejer.csv")
    assert float(r[0]["value"]) == pytest.approx(0.2496, abs=1e-4)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "verify" and "numpy" in man["versions"] and "total_s" in man["timings"]


def test_csv_format(tmp_path):
    main(["verify", "fejer", "--out-dir", str(tmp_path)])
    raw = (tmp_path / "fejer.csv").read_bytes()
    assert b"\r" not in raw
    # 17 significant digits survive a float round trip
    v = rows(tmp_path / "fejer.csv")[0]["value"]
    assert len(v.replace(".", "").lstrip("0")) >= 16


def test_build_lp_and_spectrum(tmp_path):
    assert main(["--out-dir", str(tmp_path), "build-lp", "--p", "2", "--jmax", "6", "--out", "g.json"]) == 0
    code = main(["--out-dir", str(tmp_path), "spectrum", "--in", str(tmp_path / "g.json"), "--mode", "lp",
                 "--p", "2", "--grid", "1024", "--N", "max", "--plot", "spec.svg"])
    assert code == 0
    assert (tmp_path / "spec.svg").exists() and (tmp_path / "spectrum.json").exists()
    assert len(rows(tmp_path / "spectrum.csv")) == 6


def test_manifest_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--out-dir", str(a), "geom", "--family", "IJj", "--J", "2", "--j", "5"])
    assert main(["--out-dir", str(b), "--manifest", str(a / "manifest.json")]) == 0
    for name in ("family.csv", "family.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_false_flag_exits_2(tmp_path):
    code = main(["--out-dir", str(tmp_path), "build-ct", "--beta", "0.5", "--delta", "0.3",
                 "--k-min", "16", "--out", "block.json"])
    assert code == 2 and (tmp_path / "block.json").exists()
    assert main(["--out-dir", str(tmp_path), "verify", "ct-bound", "--in", str(tmp_path / "block.json")]) == 2
    r = rows(tmp_path / "ct_bound.csv")
    assert len(r) == 16 and set(r[0]) == {"arc", "x", "abs_SnP", "threshold", "holds"}


def test_lp_jumps(tmp_path):
    assert main(["--out-dir", str(tmp_path), "verify", "lp-jumps", "--p", "2", "--j", "5", "--per-arc", "4"]) == 0
    assert all(r["holds"] == "1" for r in rows(tmp_path / "lp_jumps.csv"))


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["build-lp", "--p", "2"]) == 1
    assert "--jmax" in capsys.readouterr().err
    assert main(["--out-dir", str(tmp_path), "verify", "ct-bound"]) == 1
    assert "--in" in capsys.readouterr().err
    assert main(["--out-dir", str(tmp_path), "profile", "--in", str(tmp_path / "missing.json"), "--x", "0.1"]) == 1


def test_console_entry(tmp_path):
    out = subprocess.run([sys.executable, "-m", "fdl", "--out-dir", str(tmp_path), "geom", "--family", "dyadic",
                          "--j", "3"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["arcs"] == 8
