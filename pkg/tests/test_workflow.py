import json
import logging

import numpy as np

from sce.core.enums import ProbabilitySource
from sce.core.models import RegionConfig
from sce.core.runner.workflow_runner import WorkflowRunner
from sce.datasets.synthetic import LIFE_EXPECTANCY_COLUMNS, LIFE_EXPECTANCY_SIZE, life_expectancy_standin


def test_standin_dataset_is_deterministic():
    first = life_expectancy_standin()
    second = life_expectancy_standin()
    assert first.shape == (LIFE_EXPECTANCY_SIZE, 2)
    assert list(first.columns) == list(LIFE_EXPECTANCY_COLUMNS)
    assert first.equals(second)
    assert first[LIFE_EXPECTANCY_COLUMNS[0]].between(30.0, 100.0).all()


def test_workflow_on_standin_dataset(tmp_path):
    frame = life_expectancy_standin()
    runner = WorkflowRunner()
    report = runner.run(frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1].to_numpy())

    # region Estimates
    assert report.n == 225
    assert report.association.rho_np > 0.0
    assert report.association.rho_sp >= 0.0
    assert not report.pqd_warning
    assert report.association.gof_diff == abs(report.association.rho_np - report.association.rho_sp)
    # endregion

    # region Regions
    assert set(report.regions) == {ProbabilitySource.SP, ProbabilitySource.NP}
    assert report.regions[ProbabilitySource.SP][0.5].n_grid == 30
    assert report.regions[ProbabilitySource.NP][0.5].n_grid == 8
    for masks in report.regions.values():
        for alpha, mask in masks.items():
            assert mask.achieved_mass >= alpha - 1e-12
    # endregion

    # region Export
    written = runner.export(report, str(tmp_path / "run"))
    assert (tmp_path / "run_coeffs.txt").exists()
    assert (tmp_path / "run_sp_a0.5.csv").exists()
    assert (tmp_path / "run_np.pgm").exists()
    summary = json.loads((tmp_path / "run_summary.json").read_text())
    assert summary["n"] == 225 and "gof_diff" in summary
    assert len(written) == 1 + 2 * (3 + 1) + 1
    # endregion


def test_workflow_warns_on_negative_dependence(caplog):
    x = np.arange(1.0, 41.0)
    with caplog.at_level(logging.WARNING):
        report = WorkflowRunner().run(x, -x, region_cfg=RegionConfig(alphas=(0.5,)))
    assert report.pqd_warning
    assert report.association.rho_np < 0.0
    assert "positive quadrant dependence" in caplog.text
