from pathlib import Path
from typing import Dict, Iterable, Optional

import numpy as np

from sce.core.base import SceBase
from sce.core.engine.association import AssociationEstimator
from sce.core.engine.fitter import GeneratorFitter
from sce.core.engine.regions import RegionEstimator
from sce.core.enums import ExportType, ProbabilitySource
from sce.core.exporters.exporter_registry import ExporterRegistry
from sce.core.models import BasisSet, FitConfig, RegionConfig, RegionMask, WorkflowReport


class WorkflowRunner(SceBase):
    """
    Real-data flow on paired observations.

    Steps:
        1. rank transform to pseudo-observations
        2. constrained fit of ψ̂
        3. ρ̂_NP, ρ̂_SP, the matching τ values and |ρ̂_NP − ρ̂_SP|
        4. nested regions from the semiparametric and the nonparametric cell probabilities

    The model assumes positive quadrant dependence. It is not tested, but a negative
    ρ̂_NP is logged as a warning and flagged on the report.
    """

    def __init__(self,
                 fitter: Optional[GeneratorFitter] = None,
                 estimator: Optional[AssociationEstimator] = None,
                 regions: Optional[RegionEstimator] = None):
        super().__init__()
        self._fitter = fitter or GeneratorFitter()
        self._estimator = estimator or AssociationEstimator()
        self._regions = regions or RegionEstimator(self._fitter.model)

    def run(self,
            x: np.ndarray,
            y: np.ndarray,
            fit_cfg: Optional[FitConfig] = None,
            region_cfg: Optional[RegionConfig] = None,
            sources: Iterable[ProbabilitySource] = (ProbabilitySource.SP, ProbabilitySource.NP)) -> WorkflowReport:
        fit_cfg = fit_cfg or FitConfig()
        region_cfg = region_cfg or RegionConfig()
        basis = BasisSet(s_max=fit_cfg.s_max)

        ps = self._fitter.rank_transform(x, y)
        with self.timed("workflow fit") as timing:
            generator, result = self._fitter.fit_pseudo_sample(ps, basis, fit_cfg)
        association = self._estimator.association_report(ps, result, basis)
        pqd_warning = association.rho_np < 0
        if pqd_warning:
            self.logger.warning(f"rho_np={association.rho_np:.4f} is negative: the data look negatively dependent "
                                f"and the fitted model assumes positive quadrant dependence")

        regions: Dict[ProbabilitySource, Dict[float, RegionMask]] = {}
        for source in sources:
            n_grid = region_cfg.grid_for(source)
            if source is ProbabilitySource.NP:
                cells = self._regions.cell_probs_np(ps, n_grid)
            elif source is ProbabilitySource.SP:
                cells = self._regions.cell_probs_sp(generator, n_grid)
            else:
                raise ValueError(f"the workflow has no known generator for source '{source.value}'")
            regions[source] = self._regions.nested_masks(cells, region_cfg.alphas, region_cfg.mass_tol)

        self.logger.info(f"Workflow on n={ps.n}: fit took {timing['duration_s']:.2f}s, nnz={result.nnz}, rho_np={association.rho_np:.4f}, "
                         f"rho_sp={association.rho_sp:.4f}, gof_diff={association.gof_diff:.4f}")
        return WorkflowReport(n=ps.n, generator=generator, fit=result, association=association, regions=regions, pqd_warning=pqd_warning)

    def export(self, report: WorkflowReport, prefix: str) -> Dict[str, str]:
        """Coefficients, one mask CSV per source and level, one image per source and a JSON summary."""
        registry = ExporterRegistry()
        filesystem = self.helpers.filesystem
        base = Path(prefix)

        written = {"coefficients": registry.export(ExportType.COEFFICIENTS, (report.generator, report.n), str(filesystem.with_suffix_name(base, "_coeffs.txt")))}
        for source, masks in report.regions.items():
            for alpha, mask in masks.items():
                destination = filesystem.with_suffix_name(base, f"_{source.value}_a{alpha:g}.csv")
                written[f"{source.value}_mask_{alpha:g}"] = registry.export(ExportType.MASK_CSV, mask, str(destination))
            written[f"{source.value}_image"] = registry.export(ExportType.MASK_PGM, masks, str(filesystem.with_suffix_name(base, f"_{source.value}.pgm")))
        written["summary"] = registry.export(ExportType.REPORT_JSON, report.summary(), str(filesystem.with_suffix_name(base, "_summary.json")))
        return written
