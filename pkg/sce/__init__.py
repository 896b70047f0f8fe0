"""
Semiparametric Copula Estimator.

Importing the package configures logging once; set SCE_LOG_LEVEL (DEBUG, INFO, WARNING, ...)
to change the level, or pass --log-level to the `sce` command.
"""
from sce.core.logging_config import setup_logging

setup_logging()
