from pathlib import Path
from typing import Union

PathLike = Union[str, Path]


class FileSystemHelper:
    """Path handling for CLI inputs and exported artifacts."""

    def prepare_output(self, path: PathLike) -> Path:
        """Creates the parent directories of an output file and returns it as a Path."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def require_file(self, path: PathLike, what: str = "input file") -> Path:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"{what} not found: {path}")
        return path

    def with_suffix_name(self, prefix: PathLike, suffix: str) -> Path:
        """'out/run' + '_a0.5.csv' -> 'out/run_a0.5.csv'"""
        prefix = Path(prefix)
        return prefix.parent / f"{prefix.name}{suffix}"
