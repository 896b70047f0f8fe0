import math
from typing import Union


class NumberHelper:
    """Decimal formatting shared by every text artifact."""

    SIGNIFICANT_DIGITS = 17

    def exact(self, value: float) -> str:
        """17 significant digits: enough to round-trip any IEEE-754 double."""
        return format(float(value), f".{self.SIGNIFICANT_DIGITS}g")

    def parse_real(self, text: Union[str, float, int]) -> float:
        """Parses a real, accepting 'inf'/'infinity'/'∞' for the limit generator."""
        if isinstance(text, (int, float)):
            return float(text)
        cleaned = text.strip().lower()
        if cleaned in ("inf", "infinity", "∞", "+inf"):
            return math.inf
        return float(cleaned)
