"""
One-Way Function Module
H applied coefficient-wise to turn f(x) into h(x)

Variants:
    modexp:g   H(n) = g^n mod p
    modsquare  H(n) = n^2 mod p (pedagogical only: square roots mod p are easy to take)
    sha256     H(n) = SHA-256(big-endian bytes of n) mod p, recommended for real use
"""

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from errors import FieldMismatch, WrongCount
from field import FieldElement, PrimeField, fe_pow
from poly import Polynomial


class OneWayKind(str, Enum):
    MODEXP = "modexp"
    MODSQUARE = "modsquare"
    SHA256 = "sha256"


def _minimal_bytes(value: int) -> bytes:
    # 0 encodes as a single zero byte
    return value.to_bytes(max(1, (value.bit_length() + 7) // 8), 'big')


@dataclass(frozen=True)
class OneWayFn:
    """A one-way map F_p -> F_p"""

    field: PrimeField
    kind: OneWayKind
    generator: Optional[FieldElement] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', OneWayKind(self.kind))
        if self.kind is OneWayKind.MODEXP:
            if self.generator is None:
                raise ValueError("modexp needs a generator g")
            gen = self.field(self.generator)
            if gen.is_zero():
                raise ValueError("modexp generator must be nonzero")
            object.__setattr__(self, 'generator', gen)

    @classmethod
    def parse(cls, name: str, field: PrimeField) -> "OneWayFn":
        """Build from 'modexp:g', 'modsquare' or 'sha256'"""
        text = name.strip().lower()
        if text.startswith("modexp"):
            _, _, g = text.partition(":")
            if not g:
                raise ValueError("modexp variant is written 'modexp:<g>'")
            return cls(field, OneWayKind.MODEXP, field(int(g)))
        if text == OneWayKind.MODSQUARE.value:
            return cls(field, OneWayKind.MODSQUARE)
        if text == OneWayKind.SHA256.value:
            return cls(field, OneWayKind.SHA256)
        raise ValueError(f"unknown one-way function '{name}'")

    @property
    def name(self) -> str:
        if self.kind is OneWayKind.MODEXP:
            return f"modexp:{self.generator.value}"
        return self.kind.value

    def apply(self, x: FieldElement) -> FieldElement:
        return oneway_apply(self, x)

    def lift(self, poly: Polynomial) -> Polynomial:
        return oneway_lift(self, poly)


def oneway_apply(H: OneWayFn, x: FieldElement) -> FieldElement:
    """H(x), always a canonical element of H's field"""
    if isinstance(x, FieldElement):
        if x.field != H.field:
            raise FieldMismatch(f"{x!r} is not in {H.field!r}")
    else:
        x = H.field(x)

    if H.kind is OneWayKind.MODEXP:
        # exponent is the integer representative of x
        return fe_pow(H.generator, x.value)
    if H.kind is OneWayKind.MODSQUARE:
        return x * x
    digest = hashlib.sha256(_minimal_bytes(x.value)).digest()
    return H.field(int.from_bytes(digest, 'big'))


def oneway_lift(H: OneWayFn, poly: Polynomial) -> Polynomial:
    """Apply H to every coefficient, keeping the coefficient count"""
    if not poly.coeffs:
        raise WrongCount("cannot lift a polynomial without coefficients")
    if poly.field != H.field:
        raise FieldMismatch(f"polynomial over {poly.field!r}, one-way function over {H.field!r}")
    return Polynomial(H.field, tuple(oneway_apply(H, c) for c in poly.coeffs))
