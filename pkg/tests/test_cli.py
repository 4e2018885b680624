import json

import pytest

from edrp import load_instance, load_plan
from edrp.cli import main, parse_seeds, parse_values


def test_parse_values_range():
    assert parse_values("25..100:25") == (25.0, 50.0, 75.0, 100.0)
    assert parse_values("5,10,15") == (5.0, 10.0, 15.0)
    assert parse_values("7") == (7.0,)


def test_parse_seeds():
    assert parse_seeds("3") == (0, 1, 2)
    assert parse_seeds("2,5,9") == (2, 5, 9)
    assert parse_seeds("4..6") == (4, 5, 6)


def _generate(tmp_path, name="inst.json", deliveries=3, cps=2, evs=1, seed=5):
    path = tmp_path / name
    rc = main(
        [
            "generate",
            "--seed",
            str(seed),
            "--deliveries",
            str(deliveries),
            "--cps",
            str(cps),
            "--evs",
            str(evs),
            "--out",
            str(path),
        ]
    )
    assert rc == 0
    return path


def test_generate_and_solve(tmp_path, capsys):
    inst_path = _generate(tmp_path)
    load_instance(inst_path)  # validates
    plan_path = tmp_path / "plan.json"
    rc = main(
        [
            "solve",
            "--instance",
            str(inst_path),
            "--method",
            "csa",
            "--plan-out",
            str(plan_path),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "served:" in out and "feasible: True" in out
    plan = load_plan(plan_path)
    assert plan.routes


def test_export_and_check_roundtrip(tmp_path, capsys):
    inst_path = _generate(tmp_path)
    lp_path = tmp_path / "model.lp"
    rc = main(["export-milp", "--instance", str(inst_path), "--lmax", "2", "--out", str(lp_path)])
    assert rc == 0
    assert lp_path.read_text().startswith("\\")

    sol_path = tmp_path / "optimum.sol"
    rc = main(
        ["oracle", "--instance", str(inst_path), "--lmax", "2", "--solution-out", str(sol_path)]
    )
    assert rc == 0
    assert sol_path.exists()
    rc = main(
        [
            "check",
            "--instance",
            str(inst_path),
            "--lmax",
            "2",
            "--solution",
            str(sol_path),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "feasible: True" in out


def test_check_flags_infeasible_dump(tmp_path, capsys):
    inst_path = _generate(tmp_path)
    sol_path = tmp_path / "empty.sol"
    sol_path.write_text("# all variables default to zero\n")
    rc = main(["check", "--instance", str(inst_path), "--solution", str(sol_path)])
    assert rc == 1
    out = capsys.readouterr().out
    assert "feasible: False" in out
    assert "C12" in out  # order variables sit below their lower bound


def test_mps_export(tmp_path):
    inst_path = _generate(tmp_path)
    mps_path = tmp_path / "model.mps"
    rc = main(["export-milp", "--instance", str(inst_path), "--lmax", "1", "--out", str(mps_path)])
    assert rc == 0
    assert mps_path.read_text().startswith("NAME")


def test_bench_cli(tmp_path, capsys):
    out_dir = tmp_path / "bench"
    rc = main(
        [
            "bench",
            "--sweep",
            "deliveries",
            "--values",
            "4,6",
            "--seeds",
            "2",
            "--methods",
            "csa,ndf",
            "--cps",
            "2",
            "--out",
            str(out_dir),
            "--no-figures",
        ]
    )
    assert rc == 0
    assert (out_dir / "metrics.csv").exists()
    assert (out_dir / "summary.csv").exists()
    stdout = capsys.readouterr().out
    assert "8 runs" in stdout


def test_cli_reports_domain_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"depot": {}}))
    rc = main(["solve", "--instance", str(bad), "--method", "csa"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_oracle_cli_respects_limits(tmp_path, capsys):
    inst_path = _generate(tmp_path, deliveries=8)
    rc = main(["oracle", "--instance", str(inst_path)])
    assert rc == 2
    assert "refusing" in capsys.readouterr().err
