from functools import cached_property
from typing import Optional

from sce.helpers.enum_helper import EnumHelper
from sce.helpers.filesystem_helper import FileSystemHelper
from sce.helpers.number_helper import NumberHelper


class HelperLibrary:
    """
    Stateless helpers shared by every component.

    Components get the process-wide instance through `SceBase.helpers`; the CLI module
    uses `HelperLibrary.global_instance()` directly.
    """

    _instance: Optional["HelperLibrary"] = None

    @classmethod
    def global_instance(cls) -> "HelperLibrary":
        if cls._instance is None:
            cls._instance = cls()
        return cls._instance

    @cached_property
    def number(self) -> NumberHelper:
        return NumberHelper()

    @cached_property
    def enum(self) -> EnumHelper:
        return EnumHelper()

    @cached_property
    def filesystem(self) -> FileSystemHelper:
        return FileSystemHelper()
