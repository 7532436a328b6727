import json

import pytest

from relaysim.cli import main


def read_lines(path):
    return path.read_text().splitlines()


def test_run_summary_and_trace(tmp_path):
    out = tmp_path / "summary.json"
    trace = tmp_path / "trace.jsonl"
    main(["run", "--rho", "0.4,0.7", "--lambda", "0.3,0.2",
          "--horizon", "400", "--seeds", "2", "--seed", "11",
          "--out", str(out), "--trace", str(trace)])

    summary = json.loads(out.read_text())
    assert summary["config"]["seed"] == 11
    assert len(summary["per_seed"]) == 2
    assert "q_avg_ci90_half" in summary

    lines = read_lines(trace)
    header = json.loads(lines[0])
    assert header["config"]["scheduler"] == "rqcsma"
    assert len(lines) == 401
    row = json.loads(lines[1])
    assert set(row) == {"t", "channel", "decision", "transmission",
                        "served_queue", "arrivals", "queues_after"}


def test_sweep_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--rho", "0.4,0.7", "--horizon", "300", "--seeds", "2",
            "--grid", "3", "--l0-max", "0.4", "--l1-max", "0.4"]
    main(args + ["--out", str(a)])
    main(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    lines = read_lines(a)
    assert lines[0].startswith("# n_relays")
    header_idx = next(i for i, l in enumerate(lines)
                      if l.startswith("lambda0,"))
    assert len(lines) - header_idx - 1 == 9


def test_region_csv_matches_closed_form(tmp_path):
    out = tmp_path / "region.csv"
    main(["region", "--rho0", "0.4", "--rho1", "0.7", "--n-angles", "5",
          "--out", str(out)])
    lines = [l for l in read_lines(out) if not l.startswith("#")]
    assert lines[0] == "angle_deg,lambda0,lambda1"
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(0.7, abs=1e-4)
    assert float(first[2]) == 0.0


def test_dtmc_check_passes(tmp_path):
    out = tmp_path / "dtmc.json"
    main(["dtmc-check", "--trials", "5", "--seed", "3", "--out", str(out)])
    report = json.loads(out.read_text())
    assert report["pass"]
    assert report["max_product_form_gap"] < 1e-8
    assert report["max_detailed_balance_violation"] < 1e-10


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("n_relays = 1\nrho = 0.4, 0.7\nlambda = 0.2, 0.1\n"
                   "horizon = 300\nn_seeds = 2\nscheduler = mws\n")
    out = tmp_path / "summary.json"
    main(["run", "-c", str(cfg), "--out", str(out)])
    summary = json.loads(out.read_text())
    assert summary["config"]["scheduler"] == "mws"
    assert summary["stable_fraction"] == 1.0
