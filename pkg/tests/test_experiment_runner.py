import pytest
from pydantic import ValidationError

from sce.core.models import ExperimentConfig
from sce.core.runner.experiment_runner import ExperimentRunner, run_repetition

REFERENCE_RHO = {1.0: 0.0, 2.0: 0.425, 4.0: 0.664, 6.0: 0.712, 8.0: 0.728}

runner = ExperimentRunner()


def test_full_study_reproduces_reference_table():
    report = runner.run(ExperimentConfig(ks=(1.0, 2.0, 4.0, 6.0, 8.0), n=100, reps=100, seed=1, s_max=4))

    for k, rho in REFERENCE_RHO.items():
        row = report.row(k)
        assert abs(row.mean_rho_sp - rho) <= 0.05
        assert row.mean_eps <= (0.13 if k == 1.0 else 0.08)
        assert row.std_eps >= 0.0 and row.std_rho_sp >= 0.0 and row.std_rho_np >= 0.0
        assert 1.0 <= row.mean_nnz <= 57.0

    assert abs(report.row(1.0).mean_rho_sp) <= 0.05
    assert report.reps == 100 and report.n == 100


def test_single_repetition_reports_zero_spread():
    report = runner.run(ExperimentConfig(ks=(2.0,), n=50, reps=1, seed=3))
    row = report.row(2.0)
    assert row.std_rho_sp == 0.0
    assert row.std_rho_np == 0.0
    assert row.std_eps == 0.0


def test_repetition_depends_only_on_its_task():
    task = (4.0, 60, 12, 3, 501)
    assert run_repetition(task) == run_repetition(task)


def test_parallel_run_matches_serial_run():
    cfg = dict(ks=(2.0, 6.0), n=40, reps=6, seed=5, s_max=3, quad_points=501)
    serial = runner.run(ExperimentConfig(**cfg, workers=1))
    parallel = runner.run(ExperimentConfig(**cfg, workers=3))
    assert [row.model_dump() for row in serial.rows] == [row.model_dump() for row in parallel.rows]


def test_table_formatting_lists_every_k():
    report = runner.run(ExperimentConfig(ks=(1.0, 2.0), n=30, reps=2, seed=1, s_max=2, quad_points=201))
    table = ExperimentRunner.format_table(report)
    assert "rho_k" in table
    assert len(table.splitlines()) == 2 + len(report.rows)
    with pytest.raises(KeyError):
        report.row(3.0)


def test_experiment_config_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig(quad_points=2000)
    with pytest.raises(ValidationError):
        ExperimentConfig(ks=(float("inf"),))
    with pytest.raises(ValidationError):
        ExperimentConfig(reps=0)
