"""
Prime Field Module
Exact arithmetic in F_p for a configurable prime p
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from sympy import isprime

import config
from errors import CompositeModulus, FieldMismatch, ModulusTooSmall, UndefinedPower, ZeroInverse
from logger import logger


@lru_cache(maxsize=256)
def _checked_prime(p: int) -> bool:
    if p >= config.PRIMALITY_DETERMINISTIC_BOUND:
        logger.debug(f"Modulus has {p.bit_length()} bits, primality is BPSW-probable")
    return isprime(p)


@dataclass(frozen=True)
class PrimeField:
    """The field F_p; construction verifies that p is a prime >= 3"""

    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, int) or isinstance(self.modulus, bool):
            raise TypeError(f"modulus must be an int, got {type(self.modulus).__name__}")
        if self.modulus < 3:
            raise ModulusTooSmall(f"modulus {self.modulus} is below 3")
        if not _checked_prime(self.modulus):
            raise CompositeModulus(f"modulus {self.modulus} is not prime")

    def __repr__(self):
        return f"F_{self.modulus}"

    def __call__(self, value: Union[int, "FieldElement"]) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldMismatch(f"{value!r} does not belong to {self!r}")
            return value
        return FieldElement(int(value) % self.modulus, self)

    def zero(self) -> "FieldElement":
        return FieldElement(0, self)

    def one(self) -> "FieldElement":
        return FieldElement(1, self)

    def random_element(self, rng) -> "FieldElement":
        return FieldElement(rng.below(self.modulus), self)

    def random_nonzero(self, rng) -> "FieldElement":
        return FieldElement(1 + rng.below(self.modulus - 1), self)


@dataclass(frozen=True, eq=False)
class FieldElement:
    """Canonical representative in [0, p) together with its field"""

    value: int
    field: PrimeField

    def __post_init__(self):
        if not 0 <= self.value < self.field.modulus:
            raise ValueError(f"{self.value} is not canonical in {self.field!r}")

    def __repr__(self):
        return f"{self.value}"

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __hash__(self):
        # Matches hash(int) so elements and plain ints mix in sets
        return hash(self.value)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return self.value == other
        return NotImplemented

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"cannot combine elements of {self.field!r} and {other.field!r}")
            return other
        if isinstance(other, int):
            return self.field(other)
        raise TypeError(f"unsupported operand {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement((self.value + other.value) % self.field.modulus, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement((self.value - other.value) % self.field.modulus, self.field)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement((self.value * other.value) % self.field.modulus, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement((-self.value) % self.field.modulus, self.field)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, exponent: int):
        return fe_pow(self, exponent)

    def inverse(self) -> "FieldElement":
        return fe_inv(self)

    def is_zero(self) -> bool:
        return self.value == 0


# =============================================================================
# Field operations
# =============================================================================

def mk_field(p: int) -> PrimeField:
    """Build the field F_p, rejecting composites and p < 3"""
    return PrimeField(p)


_OPS = {
    'add': FieldElement.__add__,
    'sub': FieldElement.__sub__,
    'mul': FieldElement.__mul__,
}


def fe_arith(op: str, x: FieldElement, y: FieldElement) -> FieldElement:
    """Apply add, sub or mul to two elements of the same field"""
    if op not in _OPS:
        raise ValueError(f"unknown field operation '{op}'")
    if x.field != y.field:
        raise FieldMismatch(f"cannot {op} elements of {x.field!r} and {y.field!r}")
    return _OPS[op](x, y)


def fe_inv(x: FieldElement) -> FieldElement:
    """Multiplicative inverse"""
    if x.value == 0:
        raise ZeroInverse(f"0 has no inverse in {x.field!r}")
    return FieldElement(pow(x.value, -1, x.field.modulus), x.field)


def fe_pow(x: FieldElement, exponent: int) -> FieldElement:
    """
    x^e mod p by square-and-multiply

    0^0 is an error rather than 1; it never arises in the schemes.
    """
    exponent = int(exponent)
    if exponent < 0:
        raise UndefinedPower(f"negative exponent {exponent}")
    if exponent == 0 and x.value == 0:
        raise UndefinedPower("0^0 is undefined")
    return FieldElement(pow(x.value, exponent, x.field.modulus), x.field)
