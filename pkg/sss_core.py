"""
Two-Level Secret Sharing Module
Share generation (f, h), level-1 h-shares, honesty verification via H(s),
gated level-2 release of f-shares and final recovery of s
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import config
from errors import (
    DuplicateKey, FieldMismatch, GateViolation, LengthMismatch, ThresholdInvalid,
    TooManyParticipants, UnknownKey, ZeroKey,
)
from field import FieldElement, PrimeField, mk_field
from logger import logger
from oneway import OneWayFn, oneway_lift
from poly import EvalPoint, Polynomial, lagrange_interpolate, poly_eval, poly_random
from random_source import RandomSource

KeyLike = Union[FieldElement, int]


@dataclass(frozen=True)
class SchemeParams:
    """Public scheme context: F_p, threshold (t, m) and the participants' public keys a_i"""

    field: PrimeField
    threshold_t: int
    participant_count_m: int
    public_keys: Tuple[FieldElement, ...]

    def __post_init__(self):
        object.__setattr__(self, 'public_keys', tuple(self.field(k) for k in self.public_keys))
        t, m = self.threshold_t, self.participant_count_m
        if t <= 1 or t > m:
            raise ThresholdInvalid(f"need 1 < t <= m, got (t, m) = ({t}, {m})")
        if m >= self.field.modulus:
            raise TooManyParticipants(f"m = {m} must stay below p = {self.field.modulus}")
        if len(self.public_keys) != m:
            raise LengthMismatch(f"expected {m} public keys, got {len(self.public_keys)}")
        if any(k.is_zero() for k in self.public_keys):
            raise ZeroKey("public keys must lie in F_p^*")
        if len(set(k.value for k in self.public_keys)) != m:
            raise DuplicateKey("public keys must be pairwise distinct")

    def key(self, key: KeyLike) -> FieldElement:
        """Normalize key and check that it is registered"""
        if isinstance(key, FieldElement) and key.field != self.field:
            raise FieldMismatch(f"key {key!r} is not in {self.field!r}")
        value = int(key)
        for k in self.public_keys:
            if k.value == value:
                return k
        raise UnknownKey(f"{value} is not a registered public key")

    def index_of(self, key: KeyLike) -> int:
        """1-based participant index P_i of a public key"""
        return self.public_keys.index(self.key(key)) + 1


@dataclass(frozen=True)
class SharePolynomials:
    """The dealer's pair (f, h) with h = H applied to f coefficient-wise"""

    f: Polynomial
    h: Polynomial

    def __post_init__(self):
        if self.f.coeff_count != self.h.coeff_count:
            raise LengthMismatch("f and h must have the same coefficient count")


class ShareRecord:
    """
    Per-participant triple (a_i, f(a_i), h(a_i)) held by the system

    The f-part can only be read after release().
    """

    __slots__ = ('public_key', 'h_share', '_f_share', 'f_released')

    def __init__(self, public_key: FieldElement, h_share: FieldElement, f_share: FieldElement):
        self.public_key = public_key
        self.h_share = h_share
        self._f_share = f_share
        self.f_released = False

    def __repr__(self):
        return f"ShareRecord(a={self.public_key}, h={self.h_share}, released={self.f_released})"

    @property
    def f_share(self) -> FieldElement:
        if not self.f_released:
            raise GateViolation(f"f-share of key {self.public_key} has not been released")
        return self._f_share

    def release(self) -> EvalPoint:
        self.f_released = True
        return EvalPoint(self.public_key, self._f_share)


class AbortReason(str, Enum):
    BELOW_THRESHOLD = "BelowThreshold"
    LEVEL1_MISMATCH = "Level1Mismatch"
    TIMEOUT = "Timeout"


class VerdictStatus(str, Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class Verdict:
    status: VerdictStatus
    released: Tuple[EvalPoint, ...] = ()
    reason: Optional[AbortReason] = None
    cheaters: FrozenSet[int] = frozenset()

    @property
    def accepted(self) -> bool:
        return self.status is VerdictStatus.ACCEPTED


class SharingSession:
    """
    System-side state of one two-level sharing

    Mutated only by sss_verify_and_release; the protocol's system actor is
    its single owner.
    """

    def __init__(self, params: SchemeParams, oneway: OneWayFn, polynomials: SharePolynomials,
                 strict: bool = True):
        if oneway.field != params.field or polynomials.f.field != params.field:
            raise FieldMismatch("params, one-way function and polynomials must share one field")
        if polynomials.f.coeff_count != params.threshold_t:
            raise LengthMismatch(f"polynomials need exactly t = {params.threshold_t} coefficients")
        if oneway_lift(oneway, polynomials.f) != polynomials.h:
            raise ValueError("h is not the one-way lift of f")

        self.params = params
        self.oneway = oneway
        self.polynomials = polynomials
        self.strict = strict
        self.expected_level1 = polynomials.h.constant
        self.verdicts: List[Verdict] = []
        self.records: Dict[int, ShareRecord] = {
            a.value: ShareRecord(a, poly_eval(polynomials.h, a), poly_eval(polynomials.f, a))
            for a in params.public_keys
        }

    def record(self, key: KeyLike) -> ShareRecord:
        return self.records[self.params.key(key).value]

    @property
    def released_keys(self) -> List[int]:
        return [k for k, r in self.records.items() if r.f_released]


def _coerce_oneway(oneway, field: PrimeField) -> OneWayFn:
    if oneway is None:
        oneway = config.DEFAULT_ONEWAY
    if isinstance(oneway, str):
        return OneWayFn.parse(oneway, field)
    if oneway.field != field:
        raise FieldMismatch(f"one-way function over {oneway.field!r}, scheme over {field!r}")
    return oneway


def _draw_keys(field: PrimeField, m: int, rng: RandomSource) -> List[FieldElement]:
    keys: List[FieldElement] = []
    seen = set()
    while len(keys) < m:
        k = field.random_nonzero(rng)
        if k.value not in seen:
            seen.add(k.value)
            keys.append(k)
    return keys


def sss_setup(p: int, t: int, m: int, public_keys: Optional[Sequence[int]] = None,
              oneway=None, rng: Optional[RandomSource] = None) -> Tuple[SchemeParams, OneWayFn]:
    """
    Validate the public scheme context

    Args:
        p: field prime
        t, m: threshold, 1 < t <= m < p
        public_keys: distinct nonzero a_i; drawn from rng when None
        oneway: OneWayFn or variant name ('modexp:3', 'modsquare', 'sha256')
        rng: random source for key generation

    Returns:
        (SchemeParams, OneWayFn)
    """
    field = mk_field(p)
    if t <= 1 or t > m:
        raise ThresholdInvalid(f"need 1 < t <= m, got (t, m) = ({t}, {m})")
    if m >= p:
        raise TooManyParticipants(f"m = {m} must stay below p = {p}")
    if public_keys is None:
        public_keys = _draw_keys(field, m, rng or RandomSource(config.DEFAULT_SEED))
    params = SchemeParams(field, t, m, tuple(public_keys))
    return params, _coerce_oneway(oneway, field)


def build_session(params: SchemeParams, oneway: OneWayFn, polynomials: SharePolynomials,
                  strict: bool = None) -> SharingSession:
    """Session over an arbitrary (f, h) pair; shared by the single and multi secret flows"""
    if strict is None:
        strict = config.STRICT_VERIFICATION
    return SharingSession(params, oneway, polynomials, strict)


def sss_generate(params: SchemeParams, oneway: OneWayFn, secret: KeyLike, rng: RandomSource,
                 strict: bool = None) -> SharingSession:
    """f = s + r_1 x + ... + r_{t-1} x^{t-1}, h = H(f) coefficient-wise, all m records computed"""
    if isinstance(secret, FieldElement) and secret.field != params.field:
        raise FieldMismatch(f"secret is not in {params.field!r}")
    s = params.field(secret)
    f = poly_random(params.field, s, params.threshold_t, rng)
    h = oneway_lift(oneway, f)
    session = build_session(params, oneway, SharePolynomials(f, h), strict)
    logger.debug(f"Dealer generated (f, h) with t={params.threshold_t}, m={params.participant_count_m}")
    return session


def sss_level1_shares(session: SharingSession, requesting_keys: Iterable[KeyLike]) -> List[EvalPoint]:
    """h-shares for exactly the requested keys, in registration order"""
    wanted = {session.params.key(k).value for k in requesting_keys}
    return [
        EvalPoint(r.public_key, r.h_share)
        for key, r in session.records.items() if key in wanted
    ]


def sss_level1_recover(points: Sequence[EvalPoint], t: int) -> Tuple[Polynomial, FieldElement]:
    """Interpolate h from exactly t points; the claim is its constant term H(s)"""
    recovered = lagrange_interpolate(points, t)
    return recovered, recovered.constant


def verify_shares(session: SharingSession, submissions: Mapping[KeyLike, KeyLike]) -> FrozenSet[int]:
    """Per-share honesty test: keys whose submitted h value differs from the stored record"""
    cheaters = set()
    for key, value in submissions.items():
        record = session.record(key)
        if session.params.field(value) != record.h_share:
            cheaters.add(record.public_key.value)
    return frozenset(cheaters)


def _claim_matches(session: SharingSession, claimed) -> bool:
    field = session.params.field
    if isinstance(claimed, Polynomial):
        if claimed.field != field:
            raise FieldMismatch(f"claim over {claimed.field!r} cannot verify a session over {field!r}")
        if session.strict:
            return claimed == session.polynomials.h
        claimed = claimed.constant
    return field(claimed) == session.expected_level1


def _reject(session: SharingSession, reason: AbortReason, cheaters=frozenset()) -> Verdict:
    verdict = Verdict(VerdictStatus.REJECTED, reason=reason, cheaters=frozenset(cheaters))
    session.verdicts.append(verdict)
    logger.warning(f"⛔ Level-1 claim rejected: {reason.value}")
    return verdict


def sss_verify_and_release(session: SharingSession, claimed: Union[KeyLike, Polynomial],
                           submitting_keys: Iterable[KeyLike],
                           submissions: Optional[Mapping[KeyLike, KeyLike]] = None,
                           used_keys: Optional[Iterable[KeyLike]] = None) -> Verdict:
    """
    Verify the level-1 claim and gate the release of f-shares

    Args:
        session: system-side session
        claimed: H(s) or the whole recovered h(x)
        submitting_keys: every participant that took part in recovering h
        submissions: strict mode only, the h value each submitter posted
        used_keys: strict mode only, the t keys whose points built the claim

    Returns:
        Accepted with the released (a_i, f(a_i)) points, or Rejected with a reason
    """
    keys = [session.params.key(k) for k in submitting_keys]
    unique = list(dict.fromkeys(k.value for k in keys))
    t = session.params.threshold_t

    if len(unique) < t:
        return _reject(session, AbortReason.BELOW_THRESHOLD)

    cheaters: FrozenSet[int] = frozenset()
    if session.strict and submissions is not None:
        cheaters = verify_shares(session, submissions)
        used = {session.params.key(k).value for k in (used_keys or ())}
        if cheaters & used:
            return _reject(session, AbortReason.LEVEL1_MISMATCH, cheaters)

    if not _claim_matches(session, claimed):
        return _reject(session, AbortReason.LEVEL1_MISMATCH, cheaters)

    eligible = [k for k in unique if k not in cheaters]
    if len(eligible) < t:
        return _reject(session, AbortReason.BELOW_THRESHOLD, cheaters)

    eligible_set = set(eligible)
    released = tuple(
        record.release() for key, record in session.records.items() if key in eligible_set
    )
    verdict = Verdict(VerdictStatus.ACCEPTED, released=released, cheaters=cheaters)
    session.verdicts.append(verdict)
    logger.info(f"✅ Level-1 claim verified, f-shares released to {len(released)} participants")
    return verdict


def level2_polynomial(points: Sequence[EvalPoint], t: int) -> Polynomial:
    """Recover the full f from exactly t released points"""
    return lagrange_interpolate(points, t)


def sss_level2_recover(points: Sequence[EvalPoint], t: int) -> FieldElement:
    """Recover the secret s = f(0)"""
    return level2_polynomial(points, t).constant
