import logging
import time
from abc import ABC
from contextlib import contextmanager
from typing import Dict, Iterator

from sce.helpers.helper_library import HelperLibrary


class SceBase(ABC):
    """
    Base class for all core Semiparametric Copula Estimator components.

    Provides:
        - module-aware logger via `self.logger`
        - shared helper library via `self.helpers`
        - `self.timed(...)` for wall-clock timing of long operations
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._logger = logging.getLogger(self.__class__.__module__)

    @property
    def logger(self) -> logging.Logger:
        return self._logger

    @property
    def helpers(self) -> HelperLibrary:
        return HelperLibrary.global_instance()

    @contextmanager
    def timed(self, operation: str) -> Iterator[Dict[str, float]]:
        """
        Measures the enclosed block; `duration_s` is filled in when the block exits.

        Example:
            with self.timed("fit") as timing:
                ...
            timing["duration_s"]
        """
        timing = {"duration_s": 0.0}
        started = time.perf_counter()
        try:
            yield timing
        finally:
            timing["duration_s"] = time.perf_counter() - started
            self.logger.debug(f"{operation} finished in {timing['duration_s']:.3f}s")
