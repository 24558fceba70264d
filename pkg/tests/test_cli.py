"""End-to-end command tests through main(), exercising every exit code."""

import csv
import json

import pytest

from dheac import ModelParams, evaluate_point, generate_network
from dheac.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_SHORTAGE,
    EXIT_USAGE,
    EXIT_VERIFY,
    main,
)

TINY_GRID = ["--ms", "4,8", "--qs", "0.05", "--demands", "0.4",
             "--skews", "0,1"]


def read_csv(path):
    with open(path) as fh:
        comments = []
        rows = []
        header = None
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
                continue
            if header is None:
                header = next(csv.reader([line]))
                continue
            rows.append(dict(zip(header, next(csv.reader([line])))))
    return comments, header, rows


def test_sweep_analytic_rows_and_ratios(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--mode", "analytic", "--out", str(out),
                 *TINY_GRID]) == EXIT_OK
    comments, header, rows = read_csv(out)
    assert len(rows) == 4
    assert all(r["mode"] == "analytic" for r in rows)
    assert any("dheac" in c for c in comments)

    row = next(r for r in rows if r["m"] == "8" and r["skew"] == "1")
    net = generate_network(8, 1.0, 80)
    rec = evaluate_point(net.caps, 32, ModelParams(q=0.05))
    assert float(row["thr_upper"]) == pytest.approx(rec.THR_upper, rel=1e-9)
    assert float(row["ratio_thr_conservative"]) == pytest.approx(
        rec.THR_b2 / rec.THR_lower, rel=1e-9)
    assert float(row["ratio_l_optimistic"]) == pytest.approx(
        rec.L_d_optimistic / rec.L_b2, rel=1e-9)


def test_sweep_emits_one_mc_row_per_point(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--mode", "both", "--trials", "300", "--seed", "7",
                 "--out", str(out), *TINY_GRID]) == EXIT_OK
    _, header, rows = read_csv(out)
    assert len(rows) == 8
    mc = [r for r in rows if r["mode"] == "mc"]
    assert len(mc) == 4
    assert all(r["trials"] == "300" and r["seed"] == "7" for r in mc)
    assert all(r["mc_p_conservative"] != "" for r in mc)
    analytic = [r for r in rows if r["mode"] == "analytic"]
    assert all(r["trials"] == "" for r in analytic)


def test_sweep_chi_flag_filters_columns(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--mode", "both", "--chi", "optimistic",
                 "--trials", "200", "--out", str(out), *TINY_GRID]) == EXIT_OK
    _, header, rows = read_csv(out)
    assert "mc_p_optimistic" in header
    assert "mc_p_conservative" not in header
    assert "thr_lower" not in header


def test_sweep_worker_count_does_not_change_bytes(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["sweep", "--mode", "mc", "--trials", "200", *TINY_GRID]
    assert main([*args, "--workers", "1", "--out", str(a)]) == EXIT_OK
    assert main([*args, "--workers", "2", "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_sweep_svg(tmp_path):
    out = tmp_path / "sweep.csv"
    svg = tmp_path / "map.svg"
    assert main(["sweep", "--out", str(out), "--svg", str(svg),
                 *TINY_GRID]) == EXIT_OK
    text = svg.read_text()
    assert text.startswith("<svg ") and "</svg>" in text


def test_grid_file_overrides_and_validation(tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"ms": [4], "qs": [0.0], "demands": [0.4],
                                "skews": [0.0], "t_dist": 0.1}))
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--grid", str(grid), "--out", str(out)]) == EXIT_OK
    comments, _, rows = read_csv(out)
    assert len(rows) == 1
    assert any("t_dist=0.1" in c for c in comments)

    grid.write_text(json.dumps({"bogus": 1}))
    assert main(["sweep", "--grid", str(grid), "--out", str(out)]) == EXIT_USAGE


def test_fairness_warns_on_low_trials(tmp_path, capsys):
    out = tmp_path / "fair.csv"
    assert main(["fairness", "--trials", "500", "--ms", "4", "--demands",
                 "0.4", "--skews", "0", "--out", str(out)]) == EXIT_OK
    assert "below the recommended" in capsys.readouterr().err
    _, _, rows = read_csv(out)
    assert rows[0]["jain"] == "1"
    assert rows[0]["method"] == "exact"


def test_fairness_ecdf_side_files(tmp_path):
    out = tmp_path / "fair.csv"
    ecdf_dir = tmp_path / "ecdf"
    assert main(["fairness", "--trials", "20000", "--ms", "16", "--demands",
                 "0.4", "--skews", "1.0", "--out", str(out),
                 "--ecdf-out", str(ecdf_dir)]) == EXIT_OK
    files = list(ecdf_dir.iterdir())
    assert len(files) == 1
    _, header, rows = read_csv(files[0])
    assert header == ["win_prob", "cum_fraction"]
    assert float(rows[-1]["cum_fraction"]) == pytest.approx(1.0)


def test_fairness_exact_guard_is_a_usage_error(tmp_path):
    code = main(["fairness", "--method", "exact", "--ms", "32", "--demands",
                 "0.4", "--skews", "0", "--trials", "10000",
                 "--out", str(tmp_path / "f.csv")])
    assert code == EXIT_USAGE


def test_breakeven_matrix(tmp_path, capsys):
    out = tmp_path / "be.csv"
    assert main(["breakeven", "--ms", "4,32", "--qs", "0.01,0.15",
                 "--out", str(out)]) == EXIT_OK
    _, _, rows = read_csv(out)
    assert len(rows) == 4
    assert all(r["demand"] == "0.4" and r["skew"] == "1" for r in rows)
    small = next(r for r in rows if r["m"] == "4" and r["q"] == "0.01")
    big = next(r for r in rows if r["m"] == "32" and r["q"] == "0.15")
    assert float(big["ratio_thr_optimistic"]) < float(
        small["ratio_thr_optimistic"])
    assert "optimistic" in capsys.readouterr().out


def test_verify_quantum_pass_and_json(tmp_path):
    report = tmp_path / "report.json"
    code = main(["verify-quantum", "--caps", "3,3,3,3", "--k-req", "4",
                 "--draws", "20000", "--json", str(report)])
    assert code == EXIT_OK
    payload = json.loads(report.read_text())
    assert payload["passed"] is True
    assert payload["support_violations"] == 0


def test_verify_quantum_corruption_hook():
    assert main(["verify-quantum", "--caps", "3,3,3,3", "--k-req", "4",
                 "--draws", "2000", "--corrupt"]) == EXIT_VERIFY


def test_mc_dump_shape(tmp_path):
    out = tmp_path / "mc.csv"
    assert main(["mc", "--caps", "3,3,3,3", "--k-req", "4", "--q", "0",
                 "--trials", "25", "--seed", "5", "--out", str(out)]) == EXIT_OK
    _, header, rows = read_csv(out)
    assert header == ["trial", "succeeded", "attempts_total", "latency",
                      "winners", "quotas"]
    assert len(rows) == 25
    # loss-free conservative accounting: 4 + 8 + 4 qubits, one attempt each
    assert all(r["attempts_total"] == "16" for r in rows)
    assert all(r["succeeded"] == "1" for r in rows)
    assert [int(v) for v in rows[3]["quotas"].split(";")] == [2, 2]


def test_mc_shortage_exit():
    assert main(["mc", "--caps", "2,2", "--k-req", "5",
                 "--trials", "5"]) == EXIT_SHORTAGE


def test_usage_errors():
    assert main(["mc", "--caps", "3,3"]) == EXIT_USAGE
    assert main(["mc", "--caps", "3,3", "--k-req", "2", "--demand",
                 "0.5"]) == EXIT_USAGE
    assert main(["verify-quantum", "--k-req", "4"]) == EXIT_USAGE


def test_io_error_exit():
    assert main(["breakeven", "--ms", "2", "--qs", "0.05",
                 "--out", "/nonexistent-dir/x.csv"]) == EXIT_IO
