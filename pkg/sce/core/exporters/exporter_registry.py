from typing import Any, Dict, Optional

from sce.core.enums import ExportType
from sce.core.exporters.coefficients_exporter import CoefficientsExporter
from sce.core.exporters.csv_exporter import MaskCsvExporter, PsiCsvExporter, ReportCsvExporter, SampleCsvExporter
from sce.core.exporters.exporter_base import ExporterBase
from sce.core.exporters.json_exporter import JsonExporter
from sce.core.exporters.pgm_exporter import MaskPgmExporter


class ExporterRegistry:
    """
    Maps every ExportType to its exporter.

    Example:
        ExporterRegistry().export(ExportType.MASK_PGM, masks, "regions.pgm")
    """

    def __init__(self):
        self._exporters: Dict[ExportType, ExporterBase] = {
            ExportType.SAMPLE_CSV: SampleCsvExporter(),
            ExportType.PSI_CSV: PsiCsvExporter(),
            ExportType.COEFFICIENTS: CoefficientsExporter(),
            ExportType.MASK_CSV: MaskCsvExporter(),
            ExportType.MASK_PGM: MaskPgmExporter(),
            ExportType.REPORT_CSV: ReportCsvExporter(),
            ExportType.REPORT_JSON: JsonExporter(),
        }

    def get(self, export_type: ExportType) -> ExporterBase:
        exporter = self._exporters.get(export_type)
        if exporter is None:
            raise ValueError(f"No exporter registered for type '{getattr(export_type, 'name', export_type)}'")
        return exporter

    def export(self,
               export_type: ExportType,
               payload: Any,
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        return self.get(export_type).export(payload, destination, config)
