import json

import numpy as np
import pytest

from fmmd import cli, experiments
from fmmd.cli import build_parser, config_from_args, main
from fmmd.experiments import read_rows
from fmmd.mesh import FunctionSet, uniform_mesh, write_function_set

FAST = ["--trials", "3", "--perms", "9"]


def test_mean_shift_writes_csv(tmp_path):
    out = tmp_path / "ms.csv"
    code = main(["mean-shift", *FAST, "--n", "8", "--mesh", "20", "--kernel", "ID,COV", "--out", str(out)])
    assert code == 0
    rows = read_rows(out)
    assert {r["kernel"] for r in rows} == {"ID", "COV"}
    assert {r["delta"] for r in rows} == {0.0, 0.5, 1.0, 1.5, 2.0}


def test_outputs_are_byte_identical(tmp_path):
    args = ["var-shift-2", *FAST, "--n", "6", "--mesh", "30", "--deltas", "1,2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--out", str(a)]) == 0
    assert main([*args, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_stdout_output(capsys):
    assert main(["higher-order", *FAST, "--n", "4", "--mesh", "15", "--deltas", "0", "--kernel", "sqr"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "experiment,kernel,delta,n,N,power,stderr,seed"
    assert lines[1].startswith("higher-order,SQR,0.0,4,15,")


def test_usage_errors(capsys):
    assert main(["bogus"]) == 2
    assert main(["mean-shift", "--trials", "x"]) == 2
    assert main(["mean-shift", "--kernel", "RBF"]) == 2
    assert main(["size", *FAST, "--n", "40"]) == 2
    assert main(["growth", *FAST]) == 2


def test_data_errors(tmp_path):
    assert main(["size", *FAST, "--data", str(tmp_path / "missing.csv")]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("t,a\n0,1\n1,oops\n")
    assert main(["size", *FAST, "--data", str(bad)]) == 3


def test_growth_from_files(tmp_path):
    m = uniform_mesh(12)
    rng = np.random.default_rng(0)
    a, b = tmp_path / "boys.csv", tmp_path / "girls.csv"
    write_function_set(FunctionSet(m, rng.standard_normal((8, 12))), a)
    write_function_set(FunctionSet(m, 1 + rng.standard_normal((9, 12))), b)
    out = tmp_path / "g.csv"
    code = main(["growth", *FAST, "--n", "5", "--data", str(a), "--data", str(b), "--out", str(out)])
    assert code == 0
    assert len(read_rows(out)) == 5


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 9, "trials": 7, "kernel": ["ID"], "mesh": 30, "paper_scale": True}))
    args = build_parser().parse_args(["mean-shift", "--config", str(cfg), "--trials", "2"])
    c = config_from_args(args)
    assert (c.seed, c.n_trials, c.n_perm, c.kernels, c.mesh) == (9, 2, 1000, ("ID",), (30,))


def test_paper_scale_flag():
    c = config_from_args(build_parser().parse_args(["scaling", "--paper-scale"]))
    assert (c.n_trials, c.n_perm) == (500, 1000)


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    assert main(["mean-shift", "--config", str(cfg)]) == 2
    cfg.write_text("{not json")
    assert main(["mean-shift", "--config", str(cfg)]) == 2


def test_validate_flag_exit_code(monkeypatch, tmp_path):
    monkeypatch.setattr(cli, "run", lambda cfg: ([], experiments.VALIDATE_FIELDS, ["mean-shift"]))
    assert main(["validate", "--out", str(tmp_path / "v.csv")]) == 4


def test_validate_runs(tmp_path):
    out = tmp_path / "v.csv"
    code = main(["validate", "--trials", "20", "--n", "30", "--mesh", "10", "--out", str(out)])
    assert code in (0, 4)
    rows = read_rows(out)
    assert rows[0]["case"] == "identical"
