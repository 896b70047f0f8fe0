from abc import abstractmethod, ABC
from pathlib import Path
from typing import Any, Dict, Optional

from sce.core.base import SceBase


class ExporterBase(SceBase, ABC):
    """
    Abstract base class for all exporters of the Semiparametric Copula Estimator.

    Exporters persist results (samples, coefficients, masks, reports) as plain-text
    artifacts. Numbers are written with 17 significant digits, so equal inputs give
    byte-identical files.
    """

    DEFAULT_FILE_NAME = "sce_output.txt"

    def _resolve(self, destination: Optional[str]) -> Path:
        return self.helpers.filesystem.prepare_output(destination or self.DEFAULT_FILE_NAME)

    @abstractmethod
    def export(self,
               payload: Any,
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        """Export a payload to a target destination and return the written path."""
        pass
