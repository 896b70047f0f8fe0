from typing import Any, Dict, Optional, Tuple

from sce.core.exporters.exporter_base import ExporterBase
from sce.core.models import GeneratorSpec


class CoefficientsExporter(ExporterBase):
    """
    Writes a fitted generator in the coefficient file format:

        # smax=<int> n=<int>
        s<TAB>ℓ<TAB>a          (one line per nonzero coefficient, basis order, 17 significant digits)

    Payload: tuple (fitted GeneratorSpec, sample size n).
    """

    DEFAULT_FILE_NAME = "coefficients.txt"

    def export(self,
               payload: Tuple[GeneratorSpec, int],
               destination: Optional[str] = None,
               config: Optional[Dict[str, Any]] = None) -> Optional[str]:
        generator, n = payload
        if generator.basis is None or generator.coefficients is None:
            raise ValueError(f"only fitted generators can be exported as coefficients, got {generator.describe()}")
        output_path = self._resolve(destination)
        lines = [f"# smax={generator.basis.s_max} n={n}"]
        written = 0
        for index, value in zip(generator.basis.indices, generator.coefficients):
            if value != 0.0:
                lines.append(f"{index.s}\t{index.ell}\t{self.helpers.number.exact(value)}")
                written += 1
        output_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        self.logger.info(f"{written} nonzero coefficient(s) exported to '{output_path.resolve()}'")
        return str(output_path.resolve())
