import pytest

from errors import LengthMismatch, MessageBitsInvalid, ThresholdTooLarge
from field import mk_field
from mss_core import (
    SecretVector, mss_build_session, mss_derive, mss_generate, mss_recover_secrets,
    mss_recovered_components,
)
from random_source import RandomSource
from sss_core import level2_polynomial, sss_level1_recover, sss_level1_shares, sss_setup, sss_verify_and_release

PRIMES = (101, 199, 257, 65537, 2 ** 31 - 1, 2 ** 61 - 1)
ONEWAYS = ("sha256", "modsquare", "modexp:2")


def recover_via_gate(session, derived, keys, k):
    """Honest level-1 claim from keys, then level-2 recovery of the message"""
    t = session.params.threshold_t
    recovered_h, _ = sss_level1_recover(sss_level1_shares(session, keys), t)
    verdict = sss_verify_and_release(session, recovered_h, keys)
    assert verdict.accepted
    f = level2_polynomial(verdict.released[:t], t)
    return [s.value for s in mss_recover_secrets(f, derived.s_tilde, k)]


def test_derive_worked_example_one(example1):
    example, params, oneway, secret = example1
    derived = mss_derive(secret, params, oneway)
    assert derived.s_tilde == example.s_tilde
    assert [a.value for a in derived.alphas] == list(example.alphas)
    assert [h.value for h in derived.h_alphas] == list(example.h_alphas)


def test_generate_uses_alphas_without_randomness(example2):
    example, params, oneway, secret = example2
    derived = mss_derive(secret, params, oneway)
    polys = mss_generate(derived, params)
    assert polys.f.as_ints() == list(example.alphas)
    assert polys.h.as_ints() == list(example.h_alphas)


def test_message_bits_bounds():
    params, H = sss_setup(199, 3, 5, (1, 2, 3, 4, 5), "sha256")
    F = params.field
    with pytest.raises(MessageBitsInvalid):
        mss_derive(SecretVector.from_ints(F, [1, 2, 3, 4, 5], 1), params, H)
    with pytest.raises(MessageBitsInvalid):
        mss_derive(SecretVector.from_ints(F, [1, 2, 3, 4, 5], 4), params, H)


def test_threshold_must_leave_one_component_out():
    params, H = sss_setup(199, 5, 5, (1, 2, 3, 4, 5), "sha256")
    with pytest.raises(ThresholdTooLarge):
        mss_derive(SecretVector.from_ints(params.field, [1, 2, 3, 4, 5], 2), params, H)


def test_secret_length_must_match_m():
    params, H = sss_setup(199, 3, 5, (1, 2, 3, 4, 5), "sha256")
    with pytest.raises(LengthMismatch):
        mss_derive(SecretVector.from_ints(params.field, [1, 2, 3, 4], 2), params, H)


def test_all_zero_secret():
    params, H = sss_setup(199, 3, 5, (1, 2, 3, 4, 5), "modexp:3")
    secret = SecretVector.from_ints(params.field, [0] * 5, 3)
    session, derived = mss_build_session(secret, params, H)
    assert derived.s_tilde == 0
    assert recover_via_gate(session, derived, [1, 2, 3], 3) == [0, 0, 0]


def test_components_beyond_message_are_recoverable(example1):
    example, params, oneway, secret = example1
    session, derived = mss_build_session(secret, params, oneway)
    recovered = mss_recovered_components(session.polynomials.f, derived.s_tilde)
    assert [c.value for c in recovered] == list(example.secret[:example.threshold])


def test_any_t_subset_recovers(example1):
    example, params, oneway, secret = example1
    session, derived = mss_build_session(secret, params, oneway)
    last_five = [k.value for k in params.public_keys[-5:]]
    assert recover_via_gate(session, derived, last_five, example.message_bits) == list(example.message)


def test_round_trip_property():
    """Recovered message components equal the originals over 1000 random configurations"""
    for seed in range(1000):
        rng = RandomSource(seed)
        p = PRIMES[rng.below(len(PRIMES))]
        m = rng.between(3, 12)
        t = rng.between(2, m - 1)
        k = rng.between(2, t)
        params, H = sss_setup(p, t, m, oneway=ONEWAYS[seed % len(ONEWAYS)], rng=rng.child(1))
        F = mk_field(p)
        values = [F.random_element(rng).value for _ in range(m)]
        session, derived = mss_build_session(SecretVector.from_ints(F, values, k), params, H)
        keys = [a.value for a in rng.sample(list(params.public_keys), t)]
        assert recover_via_gate(session, derived, keys, k) == values[:k], f"seed {seed}"


def shift_parity(values, t, delta, p):
    """Move delta between the first two components past t; the sum is unchanged"""
    twin = list(values)
    twin[t] = (twin[t] + delta) % p
    twin[t + 1] = (twin[t + 1] - delta) % p
    return twin


def test_equal_sum_and_alphas_alias(example1):
    example, params, oneway, secret = example1
    values = shift_parity(example.secret, example.threshold, 10, example.prime)
    assert values != list(example.secret)
    twin = SecretVector.from_ints(params.field, values, example.message_bits)

    session, derived = mss_build_session(secret, params, oneway)
    twin_session, twin_derived = mss_build_session(twin, params, oneway)
    assert twin != secret
    assert twin_derived == derived
    assert twin_session.polynomials == session.polynomials

    keys = [k.value for k in params.public_keys[:example.threshold]]
    recovered = recover_via_gate(session, derived, keys, example.message_bits)
    assert recover_via_gate(twin_session, twin_derived, keys, example.message_bits) == recovered
    assert recovered == list(example.message)


def test_aliasing_over_random_configurations():
    for seed in range(200):
        rng = RandomSource(seed)
        p = PRIMES[rng.below(len(PRIMES))]
        m = rng.between(4, 12)
        t = rng.between(2, m - 2)
        params, H = sss_setup(p, t, m, oneway=ONEWAYS[seed % len(ONEWAYS)], rng=rng.child(1))
        F = mk_field(p)
        values = [F.random_element(rng).value for _ in range(m)]
        twin = shift_parity(values, t, F.random_nonzero(rng).value, p)
        session, derived = mss_build_session(SecretVector.from_ints(F, values, t), params, H)
        twin_session, twin_derived = mss_build_session(SecretVector.from_ints(F, twin, t), params, H)
        assert twin_derived == derived, f"seed {seed}"
        keys = [a.value for a in rng.sample(list(params.public_keys), t)]
        assert (recover_via_gate(twin_session, twin_derived, keys, t)
                == recover_via_gate(session, derived, keys, t)
                == values[:t]), f"seed {seed}"
