"""
Polynomial Module
Dense univariate polynomials over F_p with Horner evaluation and Lagrange interpolation
"""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

from errors import DuplicateNode, FieldMismatch, WrongCount
from field import FieldElement, PrimeField
from random_source import RandomSource


@dataclass(frozen=True)
class Polynomial:
    """
    Coefficient list, index i = coefficient of x^i

    The coefficient count is fixed by the scheme (t), so trailing zeros
    are kept: a zero leading coefficient does not lower the threshold.
    """

    field: PrimeField
    coeffs: Tuple[FieldElement, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', tuple(self.coeffs))
        if not self.coeffs:
            raise WrongCount("a polynomial needs at least one coefficient")
        for c in self.coeffs:
            if c.field != self.field:
                raise FieldMismatch(f"coefficient {c!r} is not in {self.field!r}")

    @classmethod
    def from_ints(cls, field: PrimeField, values: Iterable[int]) -> "Polynomial":
        return cls(field, tuple(field(v) for v in values))

    @property
    def coeff_count(self) -> int:
        return len(self.coeffs)

    @property
    def constant(self) -> FieldElement:
        return self.coeffs[0]

    def as_ints(self) -> List[int]:
        return [c.value for c in self.coeffs]

    def __getitem__(self, index: int) -> FieldElement:
        return self.coeffs[index]

    def __len__(self):
        return len(self.coeffs)

    def __call__(self, x: Union[FieldElement, int]) -> FieldElement:
        return poly_eval(self, x)

    def __repr__(self):
        terms = " + ".join(
            f"{c.value}" if i == 0 else f"{c.value}x^{i}" for i, c in enumerate(self.coeffs)
        )
        return f"Polynomial[{self.field!r}]({terms})"


@dataclass(frozen=True)
class EvalPoint:
    """(x, y) pair: a public key a_i with f(a_i) or h(a_i)"""

    x: FieldElement
    y: FieldElement

    @classmethod
    def from_ints(cls, field: PrimeField, x: int, y: int) -> "EvalPoint":
        return cls(field(x), field(y))

    def as_tuple(self) -> Tuple[int, int]:
        return self.x.value, self.y.value


def poly_eval(poly: Polynomial, x: Union[FieldElement, int]) -> FieldElement:
    """Horner evaluation of poly at x"""
    if isinstance(x, FieldElement):
        if x.field != poly.field:
            raise FieldMismatch(f"cannot evaluate {poly.field!r} polynomial at an element of {x.field!r}")
    else:
        x = poly.field(x)
    acc = poly.field.zero()
    for c in reversed(poly.coeffs):
        acc = acc * x + c
    return acc


def _as_points(points: Sequence[Union[EvalPoint, Tuple]], field: PrimeField = None) -> List[EvalPoint]:
    result = []
    for p in points:
        if isinstance(p, EvalPoint):
            result.append(p)
        else:
            if field is None:
                raise TypeError("plain (x, y) tuples need an explicit field")
            result.append(EvalPoint.from_ints(field, int(p[0]), int(p[1])))
    return result


def lagrange_interpolate(points: Sequence[Union[EvalPoint, Tuple]], coeff_count: int,
                         field: PrimeField = None) -> Polynomial:
    """
    Recover the unique polynomial with coeff_count coefficients through points

    Uses the master product P(x) = prod (x - x_j); each basis numerator is
    P(x) / (x - x_j) by synthetic division, so the whole sum costs O(t^2).

    Args:
        points: exactly coeff_count points with distinct x
        coeff_count: t, the number of coefficients to recover
        field: required only when points are plain int tuples

    Returns:
        Polynomial with exactly coeff_count coefficients
    """
    pts = _as_points(points, field)
    if coeff_count < 1 or len(pts) != coeff_count:
        raise WrongCount(f"need exactly {coeff_count} points, got {len(pts)}")

    field = pts[0].x.field
    for p in pts:
        if p.x.field != field or p.y.field != field:
            raise FieldMismatch("all points must belong to one field")
    xs = [p.x for p in pts]
    if len(set(x.value for x in xs)) != len(xs):
        raise DuplicateNode("interpolation nodes must be distinct")

    zero = field.zero()
    t = coeff_count

    # master[i] = coefficient of x^i in prod (x - x_j), degree t
    master = [field.one()]
    for xj in xs:
        shifted = [zero] + master
        for i in range(len(master)):
            shifted[i] = shifted[i] - xj * master[i]
        master = shifted

    result = [zero] * t
    for j, pj in enumerate(pts):
        # numerator = master / (x - x_j), degree t-1, synthetic division from the top
        numerator = [zero] * t
        carry = zero
        for i in range(t, 0, -1):
            carry = master[i] + carry * pj.x
            numerator[i - 1] = carry

        denominator = field.one()
        for m, xm in enumerate(xs):
            if m != j:
                denominator = denominator * (pj.x - xm)
        scale = pj.y * denominator.inverse()

        for i in range(t):
            result[i] = result[i] + scale * numerator[i]

    return Polynomial(field, tuple(result))


def poly_random(field: PrimeField, constant: FieldElement, coeff_count: int,
                rng: RandomSource) -> Polynomial:
    """Polynomial with the given constant term and coeff_count-1 uniform random coefficients"""
    if coeff_count < 1:
        raise WrongCount(f"coeff_count must be >= 1, got {coeff_count}")
    constant = field(constant)
    coeffs = [constant] + [field.random_element(rng) for _ in range(coeff_count - 1)]
    return Polynomial(field, tuple(coeffs))
