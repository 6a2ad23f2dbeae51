import math
import os

import pytest

from pilotqkd import cli, quantum, reports, verify


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_tables(tmp_path):
    assert run(tmp_path, "tables") == 0
    t1 = (tmp_path / "table1.csv").read_text().splitlines()
    assert t1[0] == "xi,r,p_success" and "5,54,0.96875" in t1
    rows = reports.read_csv(tmp_path / "table2.csv")
    assert list(rows[0]) == reports.TABLE2_HEADER
    assert [int(r["corrected"]) for r in rows] == [249946, 124946, 24946, 12446, 2446]
    assert (tmp_path / "fig4.csv").read_text().startswith("xi,p_success\n1,0.5\n")


def test_tables_meo_preset(tmp_path):
    assert run(tmp_path, "tables", "--orbit", "MEO") == 0
    row = reports.read_csv(tmp_path / "table2.csv")[0]
    assert float(row["f_hz"]) == 10e9 and row["corrected"] == "249946"


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_tables_readonly_dir(tmp_path, capsys):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    assert cli.main(["tables", "--out", str(ro)]) == cli.EXIT_IO
    assert str(ro) in capsys.readouterr().err


def test_tables_unwritable_target(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["tables", "--out", str(blocker / "sub")]) == cli.EXIT_IO
    assert str(blocker) in capsys.readouterr().err


def test_simulate_deterministic(tmp_path, capsys):
    args = ["simulate", "--seed", "42", "--trials", "300", "--n-data", "8"]
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "experiment.csv").read_bytes()
    assert a == (tmp_path / "b" / "experiment.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(reports.EXPERIMENT_HEADER)
    out = capsys.readouterr().out
    assert "success_rate=" in out and "trials=300" in out


def test_simulate_success_rate(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--xi", "3", "--trials", "10000", "--n-data", "4") == 0
    out = dict(line.split("=", 1) for line in capsys.readouterr().out.splitlines())
    rate = float(out["success_rate"])
    assert abs(rate - 0.875) <= 3 * math.sqrt(0.875 * 0.125 / 10000)


@pytest.mark.parametrize("args", [
    ["simulate", "--trials", "0"],
    ["sweep", "--p-min", "0.5", "--p-max", "0.5"],
    ["simulate", "--delta", "2"],
    ["simulate", "--seed", "-1"],
])
def test_validation_errors(tmp_path, args):
    assert run(tmp_path, *args) == cli.EXIT_USAGE
    assert not (tmp_path / "experiment.csv").exists()


def test_infeasible_budget_reports_quantities(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--xi", "6", "--n-data", "2400", "--trials", "1") == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "transmittable=2500" in err and "pilots=135" in err and "data=2400" in err


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scenario\nxi = 2\ntrials = 50\nn_data=4\nseed = 9\n")
    assert run(tmp_path / "a", "simulate", "--config", str(cfg)) == 0
    assert run(tmp_path / "b", "simulate", "--config", str(cfg), "--seed", "10") == 0
    rows = reports.read_csv(tmp_path / "a" / "experiment.csv")
    assert len(rows) == 50 and max(int(r["attempts"]) for r in rows) <= 2
    assert (tmp_path / "a" / "experiment.csv").read_bytes() != (tmp_path / "b" / "experiment.csv").read_bytes()


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    assert run(tmp_path, "tables", "--config", str(bad)) == cli.EXIT_USAGE
    assert run(tmp_path, "tables", "--config", str(tmp_path / "missing.cfg")) == cli.EXIT_IO


def test_sweep_round_trip(tmp_path):
    assert run(tmp_path, "sweep", "--steps", "5", "--cascade-trials", "3", "--plot") == 0
    rows = reports.read_csv(tmp_path / "fig5.csv")
    pilot_rows = [r for r in rows if r["source"] == "pilot"]
    cascade_rows = [r for r in rows if r["source"] == "cascade"]
    assert len(pilot_rows) == 15 and len(cascade_rows) == 4  # p = 0 has no cascade point
    for r in pilot_rows:
        p, xi, n = float(r["p"]), int(r["xi"]), int(r["N"])
        assert float(r["eta"]) == 1 - (1 / (1 - p)) * xi / n
    assert (tmp_path / "fig5.svg").read_text().lstrip().startswith("<?xml")
    assert (tmp_path / "cascade_summary.csv").exists()


def test_csv_reals_round_trip(tmp_path):
    vals = [0.1, 1 / 3, 2.0 ** -40, 0.021599999999999998, math.pi]
    reports.write_fig4(tmp_path / "f.csv", list(enumerate(vals)))
    parsed = [float(r["p_success"]) for r in reports.read_csv(tmp_path / "f.csv")]
    assert parsed == vals


def test_verify_clean_and_sabotaged(capsys):
    clean = verify.run_checks(0)
    assert all(r.ok for r in clean), [r.line() for r in clean if not r.ok]
    with quantum.inject_fault("u_theta_sign"):
        broken = {r.name: r.ok for r in verify.run_checks(0)}
    assert not broken["group law"] and not broken["gate fixed points"]
    assert cli.main(["verify", "--inject-fault"]) == cli.EXIT_FAIL
    assert "FAIL" in capsys.readouterr().out
