import re

import numpy as np
from click.testing import CliRunner

from sce.cli import main
from sce.cli.main import app
from sce.core.exceptions import SolverConvergenceError
from sce.core.io.readers import DataReader
from sce.core.engine.sampler import PairSampler
from sce.datasets.synthetic import life_expectancy_standin

KEY_VALUE = re.compile(r"^\w+=")


def invoke(*args):
    return CliRunner().invoke(app, [str(a) for a in args])


def parse(output):
    return dict(line.split("=", 1) for line in output.splitlines() if KEY_VALUE.match(line))


# region simulate
def test_simulate_independence_writes_stream_values(tmp_path):
    out = tmp_path / "sample.csv"
    result = invoke("simulate", "--k", 1, "--n", 3, "--seed", 7, "--out", out)
    assert result.exit_code == 0, result.output

    lines = out.read_text().splitlines()
    assert lines[0] == "u,v" and len(lines) == 4
    u, v = DataReader().read_pairs(out)
    stream_u, stream_t = PairSampler.pair_uniforms(7, 0, 3)
    assert np.array_equal(u, stream_u)
    assert np.allclose(v, stream_t, atol=1e-10)


def test_simulate_values_lie_in_unit_interval(tmp_path):
    out = tmp_path / "sample.csv"
    assert invoke("simulate", "--k", 2, "--n", 500, "--seed", 1, "--out", out).exit_code == 0
    u, v = DataReader().read_pairs(out)
    assert u.shape == (500,)
    assert ((u > 0) & (u < 1) & (v > 0) & (v < 1)).all()


def test_simulate_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    invoke("simulate", "--k", 4, "--n", 200, "--seed", 9, "--out", first)
    invoke("simulate", "--k", 4, "--n", 200, "--seed", 9, "--out", second)
    assert first.read_bytes() == second.read_bytes()


def test_simulate_rejects_limit_and_invalid_exponent(tmp_path):
    result = invoke("simulate", "--k", "inf", "--n", 10, "--out", tmp_path / "s.csv")
    assert result.exit_code == 2
    assert "non-differentiable generator" in result.output

    assert invoke("simulate", "--k", 0.5, "--n", 10, "--out", tmp_path / "s.csv").exit_code == 2
# endregion


# region fit and rho
def test_fit_simulated_file(tmp_path):
    data, coeffs = tmp_path / "data.csv", tmp_path / "coeffs.txt"
    invoke("simulate", "--k", 2, "--n", 100, "--seed", 1, "--out", data)
    result = invoke("fit", "--in", data, "--smax", 4, "--out", coeffs)
    assert result.exit_code == 0, result.output

    summary = parse(result.output)
    assert summary["n"] == "100" and summary["m"] == "57"
    assert 1 <= int(summary["nnz"]) <= 57
    assert summary["feasible"] == "true"
    assert coeffs.read_text().startswith("# smax=4 n=100")


def test_fit_two_row_file(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("x,y\n1.0,2.0\n2.0,1.0\n")
    result = invoke("fit", "--in", data, "--out", tmp_path / "c.txt")
    assert result.exit_code == 0, result.output
    assert parse(result.output)["n"] == "2"


def test_fit_reports_bad_cell(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("x,y\n1.0,2.0\n2.0,oops\n3.0,1.0\n")
    result = invoke("fit", "--in", data, "--out", tmp_path / "c.txt")
    assert result.exit_code == 2
    assert "row 3, column 2" in result.output


def test_fit_exit_code_on_solver_failure(tmp_path, monkeypatch):
    data = tmp_path / "data.csv"
    data.write_text("x,y\n1.0,2.0\n2.0,3.0\n3.0,1.0\n")

    def fail(*_, **__):
        raise SolverConvergenceError(kkt_residual=1.0, kkt_tol=1e-8, best_iterate=np.zeros(1))

    monkeypatch.setattr(main.GeneratorFitter, "fit_generator", fail)
    result = invoke("fit", "--in", data, "--out", tmp_path / "c.txt")
    assert result.exit_code == 3
    assert "did not converge" in result.output


def test_rho_comonotone_pair(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("1,1\n2,2\n")
    result = invoke("rho", "--in", data)
    assert result.exit_code == 0
    assert parse(result.output) == {"rho_np": "1.5"}


def test_rho_independent_sample(tmp_path):
    data = tmp_path / "data.csv"
    invoke("simulate", "--k", 1, "--n", 100, "--seed", 4, "--out", data)
    result = invoke("rho", "--in", data)
    assert abs(float(parse(result.output)["rho_np"])) <= 0.35


def test_rho_with_zero_coefficients(tmp_path):
    data, coeffs = tmp_path / "data.csv", tmp_path / "zero.txt"
    invoke("simulate", "--k", 2, "--n", 50, "--seed", 2, "--out", data)
    coeffs.write_text("# smax=4 n=50\n")
    result = invoke("rho", "--in", data, "--coeffs", coeffs)
    assert result.exit_code == 0
    report = parse(result.output)
    assert list(report) == ["rho_np", "tau_np", "rho_sp", "tau_sp", "gof_diff"]
    assert report["rho_sp"] == "0"


def test_rho_missing_file(tmp_path):
    result = invoke("rho", "--in", tmp_path / "nope.csv")
    assert result.exit_code == 2
    assert result.output.startswith("error:")
# endregion


# region regions
def test_regions_true_uniform(tmp_path):
    prefix = tmp_path / "uniform"
    result = invoke("regions", "--method", "true", "--k", 1, "--alpha", "0.25", "--grid", 4, "--out", prefix)
    assert result.exit_code == 0, result.output
    assert "cells=4" in result.output
    mask = (tmp_path / "uniform_a0.25.csv").read_text()
    assert mask.count("1") == 4
    assert (tmp_path / "uniform.pgm").exists()


def test_regions_true_limit_selects_one_diagonal_cell(tmp_path):
    result = invoke("regions", "--method", "true", "--k", "inf", "--alpha", "0.5", "--grid", 2, "--out", tmp_path / "limit")
    assert result.exit_code == 0
    assert (tmp_path / "limit_a0.5.csv").read_text().splitlines() == ["0,0", "1,0"]


def test_regions_np_reaches_level(tmp_path):
    data = tmp_path / "data.csv"
    invoke("simulate", "--k", 2, "--n", 500, "--seed", 3, "--out", data)
    result = invoke("regions", "--method", "np", "--in", data, "--alpha", "0.75", "--out", tmp_path / "np")
    assert result.exit_code == 0, result.output
    line = [line for line in result.output.splitlines() if line.startswith("alpha=")][-1]
    assert float(line.split("mass=")[1]) >= 0.75


def test_regions_sp_from_fitted_coefficients(tmp_path):
    data, coeffs = tmp_path / "data.csv", tmp_path / "coeffs.txt"
    invoke("simulate", "--k", 4, "--n", 150, "--seed", 8, "--out", data)
    invoke("fit", "--in", data, "--out", coeffs)
    result = invoke("regions", "--method", "sp", "--coeffs", coeffs, "--out", tmp_path / "sp")
    assert result.exit_code == 0, result.output
    assert sum(line.startswith("alpha=") for line in result.output.splitlines()) == 3
    assert (tmp_path / "sp.pgm").read_text().startswith("P2\n30 30\n255\n")


def test_regions_inconsistent_inputs(tmp_path):
    assert invoke("regions", "--method", "true", "--out", tmp_path / "x").exit_code == 2
    assert invoke("regions", "--method", "sp", "--k", 2, "--out", tmp_path / "x").exit_code == 2
    assert invoke("regions", "--method", "np", "--out", tmp_path / "x").exit_code == 2
# endregion


# region table1, workflow, dataset, psi
def test_table1_single_repetition(tmp_path):
    out = tmp_path / "table.csv"
    result = invoke("table1", "--k", "1,2", "--n", 40, "--reps", 1, "--seed", 1, "--quad", 201, "--out", out)
    assert result.exit_code == 0, result.output
    rows = out.read_text().splitlines()
    assert rows[0].startswith("k,rho_true")
    assert len(rows) == 3
    assert rows[1].split(",")[3] == "0"


def test_workflow_on_builtin_dataset(tmp_path):
    result = invoke("workflow", "--out", tmp_path / "wf")
    assert result.exit_code == 0, result.output
    summary = parse(result.output)
    assert summary["n"] == "225"
    assert float(summary["rho_np"]) > 0
    assert {"rho_sp", "gof_diff", "sp_area_0.5", "np_area_0.75"} <= set(summary)
    assert (tmp_path / "wf_np_a0.25.csv").exists()


def test_dataset_then_workflow(tmp_path):
    data = tmp_path / "life.csv"
    assert invoke("dataset", "--out", data).exit_code == 0
    assert len(data.read_text().splitlines()) == 226
    result = invoke("workflow", "--in", data, "--alpha", "0.5", "--out", tmp_path / "wf")
    assert result.exit_code == 0, result.output
    assert "gof_diff=" in result.output


def test_dataset_is_regenerated_byte_identically(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert invoke("dataset", "--out", first).exit_code == 0
    assert invoke("dataset", "--out", second).exit_code == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == "life_expectancy,female_male_gap"

    x, y = DataReader().read_pairs(first)
    frame = life_expectancy_standin()
    assert np.array_equal(x, frame.iloc[:, 0].to_numpy())
    assert np.array_equal(y, frame.iloc[:, 1].to_numpy())


def test_psi_dump(tmp_path):
    out = tmp_path / "psi.csv"
    result = invoke("psi", "--k", "inf", "--points", 5, "--out", out)
    assert result.exit_code == 0, result.output
    assert out.read_text().splitlines() == ["x,psi", "0,0", "0.25,0.25", "0.5,0.5", "0.75,0.25", "1,0"]
    assert invoke("psi", "--out", out).exit_code == 2
# endregion
