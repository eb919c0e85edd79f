import pytest

from errors import (
    DuplicateKey, FieldMismatch, GateViolation, LengthMismatch, ThresholdInvalid,
    TooManyParticipants, UnknownKey, ZeroKey,
)
from field import mk_field
from mss_core import mss_build_session
from poly import EvalPoint, Polynomial
from random_source import RandomSource
from sss_core import (
    AbortReason, SchemeParams, sss_generate, sss_level1_recover, sss_level1_shares,
    sss_level2_recover, sss_setup, sss_verify_and_release, verify_shares,
)


def make_session(secret=42, strict=True, p=199, t=3, m=5, keys=(1, 2, 3, 4, 5), oneway="modexp:3"):
    params, H = sss_setup(p, t, m, keys, oneway)
    return sss_generate(params, H, secret, RandomSource(7), strict=strict)


def honest_claim(session, keys):
    t = session.params.threshold_t
    return sss_level1_recover(sss_level1_shares(session, keys[:t]), t)


def test_setup_validation():
    with pytest.raises(ThresholdInvalid):
        sss_setup(199, 1, 5, (1, 2, 3, 4, 5))
    with pytest.raises(ThresholdInvalid):
        sss_setup(199, 6, 5, (1, 2, 3, 4, 5))
    with pytest.raises(TooManyParticipants):
        sss_setup(7, 3, 7)
    with pytest.raises(DuplicateKey):
        sss_setup(199, 3, 5, (1, 2, 3, 4, 4))
    with pytest.raises(ZeroKey):
        sss_setup(199, 3, 5, (0, 2, 3, 4, 5))
    with pytest.raises(LengthMismatch):
        sss_setup(199, 3, 5, (1, 2, 3, 4))


def test_setup_draws_distinct_nonzero_keys():
    params, _ = sss_setup(199, 5, 11, rng=RandomSource(5))
    values = [k.value for k in params.public_keys]
    assert len(set(values)) == 11
    assert 0 not in values


def test_unknown_key():
    params, _ = sss_setup(199, 3, 5, (1, 2, 3, 4, 5))
    assert params.index_of(4) == 4
    with pytest.raises(UnknownKey):
        params.key(9)


def test_generate_builds_consistent_pair():
    session = make_session(secret=42)
    f, h = session.polynomials.f, session.polynomials.h
    assert f.constant == 42
    assert f.coeff_count == 3
    assert h == session.oneway.lift(f)
    assert session.expected_level1 == h.constant


def test_f_shares_are_gated():
    session = make_session()
    record = session.record(1)
    with pytest.raises(GateViolation):
        _ = record.f_share
    assert record.h_share == session.polynomials.h(1)


def test_level1_shares_only_for_requested_keys():
    session = make_session()
    shares = sss_level1_shares(session, [4, 2])
    assert [s.x.value for s in shares] == [2, 4]


def test_honest_flow_releases_and_recovers():
    session = make_session(secret=42)
    keys = [1, 2, 3, 4]
    recovered_h, claimed = honest_claim(session, keys)
    assert recovered_h == session.polynomials.h
    verdict = sss_verify_and_release(session, claimed, keys)
    assert verdict.accepted
    assert [p.x.value for p in verdict.released] == keys
    assert sss_level2_recover(verdict.released[:3], 3) == 42
    assert session.record(1).f_share == session.polynomials.f(1)
    assert session.released_keys == keys


def test_wrong_claim_is_rejected_without_release():
    session = make_session()
    _, claimed = honest_claim(session, [1, 2, 3])
    verdict = sss_verify_and_release(session, claimed + 1, [1, 2, 3])
    assert not verdict.accepted
    assert verdict.reason is AbortReason.LEVEL1_MISMATCH
    assert verdict.released == ()
    assert session.released_keys == []


def test_too_few_submitters():
    session = make_session()
    _, claimed = honest_claim(session, [1, 2, 3])
    verdict = sss_verify_and_release(session, claimed, [1, 2, 2])
    assert verdict.reason is AbortReason.BELOW_THRESHOLD


def test_corrupt_share_used_in_recovery_is_caught():
    session = make_session(strict=False)
    shares = sss_level1_shares(session, [1, 2, 3])
    bad = [shares[0], shares[1], EvalPoint(shares[2].x, shares[2].y + 1)]
    _, claimed = sss_level1_recover(bad, 3)
    verdict = sss_verify_and_release(session, claimed, [1, 2, 3])
    assert verdict.reason is AbortReason.LEVEL1_MISMATCH


def test_strict_mode_identifies_and_excludes_cheaters():
    session = make_session(strict=True)
    honest = {k: session.record(k).h_share.value for k in (1, 2, 3, 4, 5)}
    submissions = dict(honest)
    submissions[5] = (submissions[5] + 3) % 199
    assert verify_shares(session, submissions) == {5}

    recovered_h, _ = honest_claim(session, [1, 2, 3])
    verdict = sss_verify_and_release(session, recovered_h, list(submissions), submissions, used_keys=[1, 2, 3])
    assert verdict.accepted
    assert verdict.cheaters == {5}
    assert [p.x.value for p in verdict.released] == [1, 2, 3, 4]


def test_strict_mode_rejects_when_cheater_was_used():
    session = make_session(strict=True)
    submissions = {k: session.record(k).h_share.value for k in (1, 2, 3)}
    submissions[2] += 1
    recovered_h, _ = honest_claim(session, [1, 2, 3])
    verdict = sss_verify_and_release(session, recovered_h, [1, 2, 3], submissions, used_keys=[1, 2, 3])
    assert verdict.reason is AbortReason.LEVEL1_MISMATCH
    assert verdict.cheaters == {2}


def test_strict_mode_checks_every_coefficient():
    session = make_session(strict=True)
    recovered_h, _ = honest_claim(session, [1, 2, 3])
    forged = recovered_h.from_ints(recovered_h.field, [recovered_h[0].value, recovered_h[1].value + 1,
                                                       recovered_h[2].value])
    assert not sss_verify_and_release(session, forged, [1, 2, 3]).accepted


def test_worked_example_one_h_row(example1):
    example, params, oneway, secret = example1
    session, _ = mss_build_session(secret, params, oneway)
    assert [session.record(a).h_share.value for a in params.public_keys] == list(example.h_row)


def test_params_are_public_context():
    params, _ = sss_setup(199, 3, 5, (1, 2, 3, 4, 5))
    assert isinstance(params, SchemeParams)
    assert params.threshold_t == 3 and params.participant_count_m == 5


class ZeroSource(RandomSource):
    """Draws nothing but zeros"""

    def below(self, bound):
        return 0


def test_seeded_share_table_is_frozen():
    session = make_session(secret=42)
    assert session.polynomials.f.as_ints() == [42, 194, 8]
    assert session.polynomials.h.as_ints() == [64, 86, 193]
    assert [session.record(k).h_share.value for k in range(1, 6)] == [144, 13, 69, 113, 145]

    keys = [1, 2, 3, 4, 5]
    _, claimed = honest_claim(session, keys)
    verdict = sss_verify_and_release(session, claimed, keys)
    assert [p.as_tuple() for p in verdict.released] == [(1, 45), (2, 64), (3, 99), (4, 150), (5, 18)]


def test_zero_secret_and_zero_draws_give_zero_shares():
    params, H = sss_setup(199, 2, 2, (1, 2), "modexp:3")
    session = sss_generate(params, H, 0, ZeroSource())
    assert session.polynomials.f.as_ints() == [0, 0]
    _, claimed = honest_claim(session, [1, 2])
    verdict = sss_verify_and_release(session, claimed, [1, 2])
    assert [p.y.value for p in verdict.released] == [0, 0]


def test_claim_from_another_field_is_refused():
    session = make_session()
    other = mk_field(211)
    recovered_h, claimed = honest_claim(session, [1, 2, 3])
    with pytest.raises(FieldMismatch):
        sss_verify_and_release(session, other(claimed.value), [1, 2, 3])
    with pytest.raises(FieldMismatch):
        sss_verify_and_release(session, Polynomial.from_ints(other, recovered_h.as_ints()), [1, 2, 3])
    with pytest.raises(FieldMismatch):
        verify_shares(session, {1: other(session.record(1).h_share.value)})
    assert session.released_keys == []
