import json
from typing import Any, Dict, Optional

from pydantic import BaseModel

from sce.core.exporters.exporter_base import ExporterBase


class JsonExporter(ExporterBase):
    """
    Writes a report model (ExperimentReport, AssociationReport, FitResult summary, ...) to a JSON file.

    If no destination is provided, defaults to `sce_report.json`
    in the current working directory.
    """

    DEFAULT_FILE_NAME = "sce_report.json"

    def export(self,
               payload: Any,
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        output_path = self._resolve(destination)
        data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload

        with output_path.open("w", encoding="utf-8") as f:
            json.dump(data, f, indent=(config or {}).get("indent", 2), ensure_ascii=False)

        self.logger.info(f"Report exported to '{output_path.resolve()}'")
        return str(output_path.resolve())
