"""Coefficient fields: a prime field F_p or the rationals.

Scalars are plain Python ``int`` in ``0..p-1`` for prime fields and
``fractions.Fraction`` for the rationals.  Nothing is ever rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from sympy import isprime

Scalar = Union[int, Fraction]

MAX_MODULUS = 2**64


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldConfig:
    """A prime field (``modulus`` set) or the rationals (``modulus is None``)."""

    modulus: int | None = None

    def __post_init__(self):
        if self.modulus is not None:
            p = self.modulus
            if not isinstance(p, int) or p < 2 or p >= MAX_MODULUS:
                raise FieldError(f"modulus must be an integer in [2, 2^64), got {p!r}")
            if not isprime(p):
                raise FieldError(f"modulus {p} is not prime")

    @classmethod
    def prime(cls, p: int) -> "FieldConfig":
        return cls(p)

    @classmethod
    def rational(cls) -> "FieldConfig":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "FieldConfig":
        """Parse ``p=<prime>``, a bare prime, or ``rational``/``Q``."""
        s = text.strip().lower()
        if s in ("rational", "rationals", "q"):
            return cls.rational()
        if s.startswith("p="):
            s = s[2:]
        try:
            return cls.prime(int(s))
        except ValueError as exc:
            if isinstance(exc, FieldError):
                raise
            raise FieldError(f"cannot parse field {text!r}; expected p=<prime> or rational") from None

    @property
    def is_prime(self) -> bool:
        return self.modulus is not None

    @property
    def characteristic(self) -> int:
        return self.modulus if self.modulus is not None else 0

    @property
    def size(self) -> int | None:
        """Number of elements, ``None`` for the (infinite) rationals."""
        return self.modulus

    def __str__(self) -> str:
        return f"p={self.modulus}" if self.is_prime else "rational"

    # scalar arithmetic

    def coerce(self, value) -> Scalar:
        """Map an int, Fraction, or decimal/fraction string into the field."""
        if isinstance(value, str):
            value = Fraction(value.strip())
        if self.modulus is None:
            return Fraction(value)
        p = self.modulus
        if isinstance(value, Fraction):
            if value.denominator == 1:
                return value.numerator % p
            den = value.denominator % p
            if den == 0:
                raise FieldError(f"{value} has a denominator divisible by {p}")
            return value.numerator * pow(den, -1, p) % p
        if isinstance(value, bool) or not isinstance(value, int):
            raise FieldError(f"cannot coerce {value!r} into {self}")
        return value % p

    @property
    def zero(self) -> Scalar:
        return self.coerce(0)

    @property
    def one(self) -> Scalar:
        return self.coerce(1)

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        if self.modulus is None:
            return a + b
        return (a + b) % self.modulus

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        if self.modulus is None:
            return a - b
        return (a - b) % self.modulus

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        if self.modulus is None:
            return a * b
        return a * b % self.modulus

    def neg(self, a: Scalar) -> Scalar:
        if self.modulus is None:
            return -a
        return -a % self.modulus

    def inv(self, a: Scalar) -> Scalar:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.modulus is None:
            return 1 / Fraction(a)
        return pow(a, -1, self.modulus)

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        return self.mul(a, self.inv(b))

    def pow(self, a: Scalar, e: int) -> Scalar:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.modulus is None:
            return a**e
        return pow(a, e, self.modulus)

    def divides_characteristic(self, n: int) -> bool:
        """True when ``n`` is zero in the field (only possible for F_p)."""
        return self.modulus is not None and n % self.modulus == 0

    def format_scalar(self, a: Scalar) -> str:
        return str(a)

    def elements(self):
        """Iterate over all elements of a prime field."""
        if self.modulus is None:
            raise FieldError("the rationals cannot be enumerated")
        return range(self.modulus)
