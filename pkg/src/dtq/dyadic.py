"""Exact dyadic rational arithmetic.

Every probability, influence and average-sensitivity value produced by this
package is of the form a / 2**k, so instead of floats the core computations
carry a ``Dyadic``: an arbitrary-precision numerator plus a nonnegative
power-of-two exponent.  Addition, subtraction, multiplication and halving are
closed and exact, which makes equality tests in the test suite meaningful.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

_PARSE_RE = re.compile(r"^\s*(-?\d+)\s*/\s*2\^(\d+)\s*$")


@dataclass(frozen=True)
class Dyadic:
    """The rational number ``num / 2**exp`` in canonical form.

    Canonical means ``num`` is odd or zero, and zero always carries
    ``exp == 0``.  The constructor normalises, so ``Dyadic(4, 3)`` is the
    same object value as ``Dyadic(1, 1)``.
    """

    num: int
    exp: int = 0

    def __post_init__(self) -> None:
        num, exp = self.num, self.exp
        for part in (num, exp):
            if not isinstance(part, int) or isinstance(part, bool):
                raise TypeError(f"dyadic parts must be plain ints, got {part!r}")
        if exp < 0:
            raise ValueError(f"dyadic exponent must be >= 0, got {exp}")
        if num == 0:
            exp = 0
        else:
            shift = min((num & -num).bit_length() - 1, exp)
            if shift:
                num >>= shift
                exp -= shift
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_int(cls, value: int) -> "Dyadic":
        return cls(value, 0)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse the canonical ``"a/2^k"`` form produced by ``str()``."""
        m = _PARSE_RE.match(text)
        if m is None:
            raise ValueError(f"not a dyadic literal: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other: "Dyadic | int") -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.exp >= other.exp:
            return Dyadic(self.num + (other.num << (self.exp - other.exp)), self.exp)
        return Dyadic((self.num << (other.exp - self.exp)) + other.num, other.exp)

    __radd__ = __add__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __sub__(self, other: "Dyadic | int") -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: "Dyadic | int") -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other: "Dyadic | int") -> "Dyadic":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Dyadic(self.num * other.num, self.exp + other.exp)

    __rmul__ = __mul__

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.exp)

    def half(self) -> "Dyadic":
        """Exact division by two."""
        return Dyadic(self.num, self.exp + 1)

    def shifted(self, k: int) -> "Dyadic":
        """Exact multiplication by ``2**k`` (``k`` may be negative)."""
        if k >= 0:
            if self.exp >= k:
                return Dyadic(self.num, self.exp - k)
            return Dyadic(self.num << (k - self.exp), 0)
        return Dyadic(self.num, self.exp - k)

    # -- comparisons ----------------------------------------------------------

    def _key(self, other: "Dyadic") -> tuple[int, int]:
        return self.num << other.exp, other.num << self.exp

    def __lt__(self, other: "Dyadic | int") -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._key(other)
        return a < b

    def __le__(self, other: "Dyadic | int") -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other: "Dyadic | int") -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._key(other)
        return a > b

    def __ge__(self, other: "Dyadic | int") -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._key(other)
        return a >= b

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Dyadic(other, 0)
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.num == other.num and self.exp == other.exp

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    # -- conversions ----------------------------------------------------------

    def __bool__(self) -> bool:
        return self.num != 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.exp)

    def __float__(self) -> float:
        # Fraction -> float is correctly rounded even for huge numerators.
        return float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"


def _coerce(value: "Dyadic | int") -> "Dyadic":
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Dyadic(value, 0)
    return NotImplemented


ZERO = Dyadic(0)
ONE = Dyadic(1)
