import logging
import os
from typing import Optional

LOG_LEVEL_ENV = "SCE_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Noisy loggers of the numerical stack and their minimum level
QUIET_LOGGERS = {
    "py.warnings": logging.WARNING,
    "concurrent.futures": logging.WARNING,
}


def resolve_level(level: Optional[str] = None) -> int:
    """SCE_LOG_LEVEL wins over `level`; unknown names fall back to INFO."""
    name = os.getenv(LOG_LEVEL_ENV, "").upper() or (level or "").upper()
    resolved = logging.getLevelName(name) if name else logging.INFO
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logging(level: Optional[str] = None, force: bool = False) -> None:
    logging.basicConfig(
        level=resolve_level(level),
        format=LOG_FORMAT,
        datefmt="%Y-%m-%d %H:%M:%S",
        force=force,
    )

    # numpy/scipy RuntimeWarnings are routed through logging
    logging.captureWarnings(True)
    for name, minimum in QUIET_LOGGERS.items():
        logging.getLogger(name).setLevel(minimum)
