from enum import Enum
from typing import Type, TypeVar

E = TypeVar("E", bound=Enum)


class EnumHelper:

    def parse(self, enum_type: Type[E], value: str) -> E:
        """Case-insensitive lookup by value or name."""
        for member in enum_type:
            if str(member.value).lower() == value.lower() or member.name.lower() == value.lower():
                return member
        choices = ", ".join(str(m.value) for m in enum_type)
        raise ValueError(f"'{value}' is not a valid {enum_type.__name__} (choose from: {choices})")
