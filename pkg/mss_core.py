"""
Multisecret Sharing Module
Derives s~ and alpha_1..alpha_t from a secret vector, builds (f, h) from the alphas
and recovers the message components s_j = s~ - alpha_j

Secret "bits" are whole field elements, called components here.
The first k are message components, the rest parity.
"""

from dataclasses import dataclass
from typing import Iterable, List, Tuple

from errors import FieldMismatch, LengthMismatch, MessageBitsInvalid, ThresholdTooLarge
from field import FieldElement, PrimeField
from logger import logger
from oneway import OneWayFn, oneway_apply
from poly import Polynomial
from sss_core import SchemeParams, SharePolynomials, SharingSession, build_session


@dataclass(frozen=True)
class SecretVector:
    """Secret s = (s_1..s_m) whose first k components carry the message"""

    components: Tuple[FieldElement, ...]
    message_bits_k: int

    def __post_init__(self):
        object.__setattr__(self, 'components', tuple(self.components))
        if not self.components:
            raise LengthMismatch("secret vector is empty")
        field = self.components[0].field
        if any(c.field != field for c in self.components):
            raise FieldMismatch("all components must lie in one field")

    @classmethod
    def from_ints(cls, field: PrimeField, values: Iterable[int], k: int) -> "SecretVector":
        return cls(tuple(field(v) for v in values), k)

    @property
    def field(self) -> PrimeField:
        return self.components[0].field

    @property
    def message(self) -> Tuple[FieldElement, ...]:
        return self.components[:self.message_bits_k]

    def as_ints(self) -> List[int]:
        return [c.value for c in self.components]


@dataclass(frozen=True)
class MssDerived:
    """Public s~ plus the dealer's alphas and their one-way images"""

    s_tilde: FieldElement
    alphas: Tuple[FieldElement, ...]
    h_alphas: Tuple[FieldElement, ...]


def _check_message_bits(k: int, t: int):
    if k <= 1 or k > t:
        raise MessageBitsInvalid(f"need 1 < k <= t, got k={k}, t={t}")


def mss_derive(secret: SecretVector, params: SchemeParams, oneway: OneWayFn) -> MssDerived:
    """
    s~ = sum of all components, alpha_i = s~ - s_i for i = 1..t

    Raises:
        LengthMismatch: component count differs from m
        MessageBitsInvalid: k <= 1 or k > t
        ThresholdTooLarge: t > m - 1
    """
    t, m = params.threshold_t, params.participant_count_m
    if secret.field != params.field:
        raise FieldMismatch(f"secret over {secret.field!r}, scheme over {params.field!r}")
    if len(secret.components) != m:
        raise LengthMismatch(f"secret has {len(secret.components)} components, m = {m}")
    _check_message_bits(secret.message_bits_k, t)
    if t > m - 1:
        raise ThresholdTooLarge(f"multisecret sharing needs t <= m - 1, got t={t}, m={m}")

    s_tilde = params.field.zero()
    for s in secret.components:
        s_tilde = s_tilde + s
    alphas = tuple(s_tilde - secret.components[i] for i in range(t))
    h_alphas = tuple(oneway_apply(oneway, a) for a in alphas)
    return MssDerived(s_tilde, alphas, h_alphas)


def mss_generate(derived: MssDerived, params: SchemeParams) -> SharePolynomials:
    """f = alpha_1 + alpha_2 x + ..., h = H(alpha_1) + H(alpha_2) x + ...; no fresh randomness"""
    t = params.threshold_t
    if len(derived.alphas) != t or len(derived.h_alphas) != t:
        raise LengthMismatch(f"need exactly t = {t} alphas")
    f = Polynomial(params.field, derived.alphas)
    h = Polynomial(params.field, derived.h_alphas)
    return SharePolynomials(f, h)


def mss_recovered_components(recovered_f: Polynomial, s_tilde: FieldElement) -> List[FieldElement]:
    """All t recoverable components s_j = s~ - coeff_j(f), message and non-message alike"""
    return [s_tilde - c for c in recovered_f.coeffs]


def mss_recover_secrets(recovered_f: Polynomial, s_tilde: FieldElement, k: int) -> List[FieldElement]:
    """The k message components"""
    _check_message_bits(k, recovered_f.coeff_count)
    components = mss_recovered_components(recovered_f, s_tilde)
    if k < len(components):
        logger.debug(f"Components {k + 1}..{len(components)} recovered but not part of the message")
    return components[:k]


def mss_build_session(secret: SecretVector, params: SchemeParams, oneway: OneWayFn,
                      strict: bool = None) -> Tuple[SharingSession, MssDerived]:
    """Derive, generate and wrap the MSS polynomials in a two-level session"""
    derived = mss_derive(secret, params, oneway)
    session = build_session(params, oneway, mss_generate(derived, params), strict)
    return session, derived
