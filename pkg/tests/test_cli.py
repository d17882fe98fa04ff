import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from thzgbsm.cli import main


def _read(path):
    return path.read_bytes()


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_console_script_exists():
    out = subprocess.run([sys.executable, "-m", "thzgbsm.cli", "--version"],
                         capture_output=True, text=True)
    # argparse --version exits 0 and prints the tool name
    assert out.returncode == 0
    assert "thzgbsm" in out.stdout


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_bad_choice_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", "mars", "--condition", "los",
              "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_missing_params_file_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--scenario", "office", "--condition", "los",
              "--params", str(tmp_path / "nope.yaml"),
              "--out", str(tmp_path / "o"), "--drops", "1"])
    assert exc.value.code == 2


def test_simulate_outputs_and_manifest(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--scenario", "office", "--condition", "los",
               "--drops", "5", "--seed", "3", "--out", str(out),
               "--dump-clusters"])
    assert rc == 0
    lsp = _rows(out / "lsp.csv")
    assert len(lsp) == 5
    assert set(lsp[0]) >= {"drop", "x_m", "y_m", "ds_s", "asa_deg",
                           "sf_db", "k_db"}
    stats = _rows(out / "drop_stats.csv")
    assert len(stats) == 5
    clusters = _rows(out / "clusters.csv")
    assert {"drop", "cluster", "ray", "delay_ns", "power",
            "aoa_deg", "zoa_deg", "aod_deg", "zod_deg"} <= set(clusters[0])
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "simulate"
    assert man["master_seed"] == 3
    assert {"lsp.csv", "drop_stats.csv", "clusters.csv"} <= set(man["outputs"])


def test_simulate_rerun_byte_identical(tmp_path):
    args = ["simulate", "--scenario", "umi", "--condition", "nlos",
            "--drops", "4", "--seed", "11", "--dump-clusters"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    for name in ("lsp.csv", "drop_stats.csv", "clusters.csv"):
        assert _read(a / name) == _read(b / name)


def test_simulate_worker_count_does_not_change_output(tmp_path):
    args = ["simulate", "--scenario", "office", "--condition", "nlos",
            "--drops", "6", "--seed", "2"]
    a, b = tmp_path / "w1", tmp_path / "w3"
    assert main(args + ["--out", str(a), "--workers", "1"]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert _read(a / "lsp.csv") == _read(b / "lsp.csv")
    assert _read(a / "drop_stats.csv") == _read(b / "drop_stats.csv")


def test_simulate_writes_only_inside_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    before = set(tmp_path.iterdir())
    out = tmp_path / "only"
    main(["simulate", "--scenario", "office", "--condition", "los",
          "--drops", "2", "--out", str(out)])
    after = set(tmp_path.iterdir())
    assert after - before == {out}


def test_simulate_custom_params_file(tmp_path):
    from thzgbsm.params import load_params
    p = load_params("office", "los", "measured")
    p.clusters.count = 2
    pfile = tmp_path / "mine.yaml"
    p.save(pfile)
    out = tmp_path / "sim"
    rc = main(["simulate", "--scenario", "office", "--condition", "los",
               "--params", str(pfile), "--drops", "2", "--out", str(out),
               "--dump-clusters"])
    assert rc == 0
    clusters = _rows(out / "clusters.csv")
    per_drop = {r["cluster"] for r in clusters if r["drop"] == "0"}
    # 2 generated clusters plus the direct path
    assert len(per_drop) == 3


def test_analyze_planted_ds_fixture(tmp_path):
    """Drops with two equal taps at spacing 2*10^(mu+i*step) plant an
    exact lognormal delay-spread law."""
    rows = []
    for d in range(10):
        lg = -8.0 + 0.05 * d
        delta_ns = 2.0 * 10.0 ** (lg + 9.0)
        rows.append((d, 0.0, 1.0))
        rows.append((d, delta_ns, 1.0))
    src = tmp_path / "mpcs.csv"
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["drop", "delay_ns", "power"])
        w.writerows(rows)
    out = tmp_path / "rep"
    assert main(["analyze", "--input", str(src), "--out", str(out)]) == 0
    rep = yaml.safe_load((out / "report.yaml").read_text())
    want_mu = np.mean([-8.0 + 0.05 * d for d in range(10)])
    assert rep["ds_log10s"]["mu"] == pytest.approx(want_mu, abs=1e-6)


def test_analyze_simulator_output_roundtrip(tmp_path):
    out = tmp_path / "sim"
    main(["simulate", "--scenario", "office", "--condition", "los",
          "--drops", "6", "--seed", "1", "--out", str(out),
          "--dump-clusters"])
    rep_dir = tmp_path / "rep"
    rc = main(["analyze", "--input", str(out / "clusters.csv"),
               "--out", str(rep_dir)])
    assert rc == 0
    rep = yaml.safe_load((rep_dir / "report.yaml").read_text())
    assert rep["kind"] == "mpc"
    assert "ds_log10s" in rep and "asa_log10deg" in rep and "k_db" in rep
    assert "clusters" in rep and "count_median" in rep["clusters"]
    per = _rows(rep_dir / "per_drop.csv")
    assert len(per) == 6


def test_analyze_empty_input_no_partial_outputs(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("drop,delay_ns,power\n")
    out = tmp_path / "rep"
    rc = main(["analyze", "--input", str(src), "--out", str(out)])
    assert rc == 1
    assert not (out / "report.yaml").exists()
    assert not (out / "per_drop.csv").exists()


def test_analyze_pdp_schema(tmp_path):
    src = tmp_path / "pdp.csv"
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi_rx_deg", "delay_ns", "power_linear", "distance_m"])
        for phi in (0.0, 90.0, 180.0, 270.0):
            for i, p in enumerate((1.0, 0.3, 0.05)):
                scale = 1.0 if phi == 0.0 else 0.2
                w.writerow([phi, 5.0 * i, p * scale, 20.0])
    out = tmp_path / "rep"
    rc = main(["analyze", "--input", str(src), "--out", str(out)])
    assert rc == 0
    rep = yaml.safe_load((out / "report.yaml").read_text())
    assert rep["kind"] == "pdp"
    assert rep["ds_ns"] > 0
    assert "asa_deg" in rep
    assert "pl_db" in rep


def test_roundtrip_cli_pass_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "rt"
    rc = main(["roundtrip", "--scenario", "office", "--condition", "los",
               "--drops", "40", "--seed", "0", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "PASS" in text
    rep = yaml.safe_load((out / "report.yaml").read_text())
    assert rep["status"] == "PASS"
    assert {c["statistic"] for c in rep["checks"]} == {"ds", "asa", "k"}
    assert (out / "roundtrip_drops.csv").exists()


def test_roundtrip_zero_tolerance_fails(tmp_path):
    out = tmp_path / "rt0"
    rc = main(["roundtrip", "--scenario", "umi", "--condition", "los",
               "--drops", "30", "--seed", "0", "--tol-log10", "0",
               "--out", str(out)])
    assert rc == 1


def test_capacity_single_snr_point(tmp_path):
    out = tmp_path / "cap"
    rc = main(["capacity", "--scenario", "office", "--condition", "los",
               "--source", "measured", "--drops", "3", "--snr", "30",
               "--out", str(out)])
    assert rc == 0
    rows = _rows(out / "capacity.csv")
    assert len(rows) == 1
    assert rows[0]["source"] == "measured"
    assert float(rows[0]["snr_db"]) == 30.0
    assert (out / "capacity.svg").exists()


def test_capacity_both_sources_report(tmp_path):
    out = tmp_path / "cap2"
    rc = main(["capacity", "--scenario", "office", "--condition", "los",
               "--drops", "4", "--snr", "0,30", "--out", str(out)])
    assert rc == 0
    rows = _rows(out / "capacity.csv")
    assert {r["source"] for r in rows} == {"measured", "3gpp"}
    assert len(rows) == 4
    rep = yaml.safe_load((out / "report.yaml").read_text())
    assert "gap_3gpp_minus_measured_at_30db" in rep
    svg = (out / "capacity.svg").read_text()
    assert "measured" in svg and "3gpp" in svg


def test_capacity_bad_snr_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["capacity", "--scenario", "umi", "--snr", "bogus",
              "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_capacity_rerun_byte_identical(tmp_path):
    args = ["capacity", "--scenario", "umi", "--condition", "los",
            "--source", "measured", "--drops", "3", "--snr", "10,20",
            "--seed", "4"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "2"]) == 0
    assert _read(a / "capacity.csv") == _read(b / "capacity.csv")
    assert _read(a / "capacity.svg") == _read(b / "capacity.svg")
