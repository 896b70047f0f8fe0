from typing import Any, Dict, Optional

import numpy as np

from sce.core.exporters.exporter_base import ExporterBase
from sce.core.models import RegionMask


class MaskPgmExporter(ExporterBase):
    """
    Writes nested region masks as one ASCII PGM ("P2") image, one pixel per cell.

    A cell takes the grey level of the smallest level α whose mask contains it:
    with α = 0.25, 0.5, 0.75 the levels are 0, 85 and 170, and 255 marks cells in no mask.
    Rows are written top (ℓ = N) to bottom, like the mask CSV.

    Payload: dict α → RegionMask on the same grid.
    """

    DEFAULT_FILE_NAME = "regions.pgm"
    MAX_GREY = 255

    def grey_levels(self, masks: Dict[float, RegionMask]) -> np.ndarray:
        alphas = sorted(masks)
        grid = {masks[alpha].n_grid for alpha in alphas}
        if len(grid) != 1:
            raise ValueError(f"masks must share one grid size, got {sorted(grid)}")
        n_grid = grid.pop()
        levels = np.full((n_grid, n_grid), self.MAX_GREY, dtype=int)
        # largest α first so smaller (nested) masks overwrite
        for position in range(len(alphas) - 1, -1, -1):
            grey = int(round(self.MAX_GREY * position / len(alphas)))
            levels[masks[alphas[position]].delta] = grey
        return levels.T[::-1]

    def export(self,
               payload: Dict[float, RegionMask],
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        output_path = self._resolve(destination)
        pixels = self.grey_levels(payload)
        n_grid = pixels.shape[0]
        lines = ["P2", f"{n_grid} {n_grid}", str(self.MAX_GREY)]
        lines.extend(" ".join(str(value) for value in row) for row in pixels.tolist())
        output_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.logger.info(f"Region image ({len(payload)} levels, N={n_grid}) exported to '{output_path.resolve()}'")
        return str(output_path.resolve())
