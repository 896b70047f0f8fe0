import re
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd

from sce.core.base import SceBase
from sce.core.exceptions import BasisIndexError, InputDataError
from sce.core.models import BasisIndex, BasisSet, GeneratorSpec

_HEADER = re.compile(r"^#\s*smax=(\d+)\s+n=(\d+)\s*$")
_COLUMN_NAME = re.compile(r"^[A-Za-z_][\w .()/%-]*$")
_NUMERIC_WORDS = {"nan", "inf", "infinity"}


class DataReader(SceBase):
    """
    Reads the text inputs of the command line.

    Paired data: a CSV whose first two columns hold the observations. A first line
    whose cells are all column names (a letter or underscore first, no number
    spellings such as nan or inf) is treated as a header; any other first line is
    data and its bad cells are reported like those of later rows. Row and column
    numbers in errors are 1-based positions in the file.

    Coefficient files: the format written by CoefficientsExporter.
    """

    def read_pairs(self, path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
        path = self.helpers.filesystem.require_file(path)
        try:
            frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True, keep_default_na=False)
        except pd.errors.EmptyDataError as e:
            raise InputDataError(f"{path} is empty") from e
        except pd.errors.ParserError as e:
            raise InputDataError(f"{path} is not a valid CSV file: {e}") from e

        first_line = 1
        if frame.shape[0] and self._is_header(frame.iloc[0]):
            frame = frame.iloc[1:]
            first_line = 2
        if frame.shape[1] < 2:
            raise InputDataError(f"{path} needs at least 2 columns, got {frame.shape[1]}")
        if frame.shape[0] < 2:
            raise InputDataError(f"{path} needs at least 2 data rows, got {frame.shape[0]}")

        columns = []
        for column in (0, 1):
            raw = frame.iloc[:, column].str.strip()
            values = pd.to_numeric(raw, errors="coerce")
            bad = np.flatnonzero(values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=float)))
            if bad.shape[0]:
                row = int(bad[0])
                raise InputDataError(f"non-numeric value '{raw.iloc[row]}'", row=first_line + row, column=column + 1)
            # float() round-trips 17-digit decimals exactly
            columns.append(np.array([float(cell) for cell in raw], dtype=float))

        self.logger.info(f"Read {columns[0].shape[0]} observation pairs from '{path.resolve()}'")
        return columns[0], columns[1]

    @staticmethod
    def _is_header(row: pd.Series) -> bool:
        cells = row.fillna("").str.strip()
        return bool(cells.map(lambda cell: bool(_COLUMN_NAME.match(cell)) and cell.lower() not in _NUMERIC_WORDS).all())

    def read_coefficients(self, path: Union[str, Path]) -> Tuple[GeneratorSpec, int]:
        """Fitted generator and sample size stored in a coefficient file."""
        path = self.helpers.filesystem.require_file(path, "coefficient file")
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise InputDataError(f"{path} is empty")
        header = _HEADER.match(lines[0].strip())
        if header is None:
            raise InputDataError(f"expected header '# smax=<int> n=<int>', got '{lines[0]}'", row=1)
        basis = BasisSet(s_max=int(header.group(1)))
        n = int(header.group(2))

        coefficients = np.zeros(basis.size)
        for number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise InputDataError(f"expected 's<TAB>l<TAB>a', got '{line}'", row=number)
            try:
                s, ell, value = int(fields[0]), int(fields[1]), float(fields[2])
            except ValueError as e:
                raise InputDataError(f"malformed coefficient line '{line}'", row=number) from e
            if s < 0 or ell < 0 or s > basis.s_max or ell > 2 * (2 ** s - 1):
                raise InputDataError(str(BasisIndexError(s, ell)), row=number)
            coefficients[basis.position(BasisIndex(s=s, ell=ell))] = value

        self.logger.debug(f"Read {int(np.count_nonzero(coefficients))} coefficient(s) (s_max={basis.s_max}) from '{path}'")
        return GeneratorSpec.fitted(basis, coefficients), n
