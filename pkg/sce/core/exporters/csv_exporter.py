import csv
from typing import Any, Dict, Optional, Tuple

import numpy as np

from sce.core.exporters.exporter_base import ExporterBase
from sce.core.models import ExperimentReport, RegionMask


class SampleCsvExporter(ExporterBase):
    """
    Writes simulated pairs as CSV with header `u,v` and 17-significant-digit decimals.

    Payload: tuple (u, v) of equal-length arrays.
    """

    DEFAULT_FILE_NAME = "sample.csv"

    def export(self,
               payload: Tuple[np.ndarray, np.ndarray],
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        u, v = payload
        output_path = self._resolve(destination)
        exact = self.helpers.number.exact
        with output_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["u", "v"])
            writer.writerows([exact(a), exact(b)] for a, b in zip(u, v))
        self.logger.info(f"Sample of {len(u)} pairs exported to '{output_path.resolve()}'")
        return str(output_path.resolve())


class PsiCsvExporter(ExporterBase):
    """Writes a ψ value dump as CSV with header `x,psi`. Payload: tuple (x, values)."""

    DEFAULT_FILE_NAME = "psi.csv"

    def export(self,
               payload: Tuple[np.ndarray, np.ndarray],
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        x, values = payload
        output_path = self._resolve(destination)
        exact = self.helpers.number.exact
        with output_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["x", "psi"])
            writer.writerows([exact(a), exact(b)] for a, b in zip(x, values))
        self.logger.info(f"Generator values exported to '{output_path.resolve()}'")
        return str(output_path.resolve())


class MaskCsvExporter(ExporterBase):
    """
    Writes a region mask as an N×N grid of 0/1 values laid out like the unit square:
    the first line is the top row ℓ = N, columns run k = 1..N left to right.
    """

    DEFAULT_FILE_NAME = "mask.csv"

    def export(self,
               payload: RegionMask,
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        output_path = self._resolve(destination)
        rows = payload.delta.T[::-1].astype(int)
        with output_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerows(rows.tolist())
        self.logger.info(f"Region mask (alpha={payload.alpha}, {payload.selected_count} cells) exported to '{output_path.resolve()}'")
        return str(output_path.resolve())


class ReportCsvExporter(ExporterBase):
    """Writes one CSV row per k of an ExperimentReport."""

    DEFAULT_FILE_NAME = "table1.csv"

    COLUMNS = ["k", "rho_true", "mean_rho_sp", "std_rho_sp", "mean_rho_np", "std_rho_np", "mean_eps", "std_eps", "mean_nnz"]

    def export(self,
               payload: ExperimentReport,
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        output_path = self._resolve(destination)
        column_delimiter = (config or {}).get("column_delimiter", ",")
        exact = self.helpers.number.exact
        with output_path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=self.COLUMNS, delimiter=column_delimiter, lineterminator="\n")
            writer.writeheader()
            for row in payload.rows:
                data = row.model_dump()
                writer.writerow({column: exact(data[column]) for column in self.COLUMNS})
        self.logger.info(f"Experiment report exported to '{output_path.resolve()}'")
        return str(output_path.resolve())
