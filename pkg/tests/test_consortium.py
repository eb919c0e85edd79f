import pytest

import config
from chain import Transaction, load_store, save_store, validate_chain
from consortium import (
    BlockSecretInput, BlockStatus, ConsortiumWorld, WorldSettings, attest_committee, block_threshold,
    committee_form, dealer_commitment, encode_block_secret, parity_checksum, parity_components,
    publish_commitments, run_block_interval,
)
from errors import (
    BalanceMismatch, CommitteeCollapse, ConfigInvalid, FieldTooSmall, NoTransactions,
)
from field import mk_field
from protocol import BehaviorProfile, PayloadKind
from random_source import RandomSource
from sss_core import AbortReason

F = mk_field(2 ** 61 - 1)


def ring_transactions(nodes, count, k=1):
    """count transactions cycling through nodes 1..nodes"""
    return [
        Transaction(f"T_{k}_{j}", (j - 1) % nodes + 1, j % nodes + 1, 5 * j, j)
        for j in range(1, count + 1)
    ]


# =============================================================================
# Block secret
# =============================================================================

def test_secret_input_from_transactions():
    secret_input = BlockSecretInput.from_transactions(ring_transactions(14, 20))
    assert secret_input.n_trans == 20
    assert secret_input.n_peop == 14
    assert secret_input.a_deb == secret_input.a_cred == sum(5 * j for j in range(1, 21))
    assert secret_input.t_concat.startswith("T_1_1T_1_2")


def test_secret_input_invariants():
    with pytest.raises(BalanceMismatch):
        BlockSecretInput(1, 2, "T_1_1", 10, 11)
    with pytest.raises(ValueError):
        BlockSecretInput(1, 3, "T_1_1", 10, 10)


def test_encoding_is_deterministic_and_systematic():
    secret_input = BlockSecretInput.from_transactions(ring_transactions(6, 8))
    first = encode_block_secret(secret_input, 5, 10, F)
    second = encode_block_secret(secret_input, 5, 10, F)
    assert first == second
    assert len(first.components) == 10
    assert first.message_bits_k == 5
    assert list(first.components[5:]) == parity_components(list(first.message), 10, F)
    j, weights = 7, [pow(7, i, F.modulus) for i in range(1, 6)]
    assert first.components[j - 1] == sum(w * s.value for w, s in zip(weights, first.message)) % F.modulus


def test_one_tx_id_changes_message():
    txs = ring_transactions(6, 8)
    other = list(txs)
    other[3] = Transaction("T_1_99", txs[3].from_node, txs[3].to_node, txs[3].amount, txs[3].timestamp_tick)
    a = encode_block_secret(BlockSecretInput.from_transactions(txs), 5, 10, F)
    b = encode_block_secret(BlockSecretInput.from_transactions(other), 5, 10, F)
    assert a.message != b.message


def test_small_field_rejected():
    secret_input = BlockSecretInput.from_transactions(ring_transactions(4, 4))
    with pytest.raises(FieldTooSmall):
        encode_block_secret(secret_input, 3, 5, mk_field(199))


def test_parity_checksum():
    secret = encode_block_secret(BlockSecretInput.from_transactions(ring_transactions(6, 8)), 5, 10, F)
    s_tilde = sum(secret.as_ints()) % F.modulus
    message = [c.value for c in secret.message]
    assert parity_checksum(message, s_tilde, 10, F)
    assert not parity_checksum([message[0] + 1] + message[1:], s_tilde, 10, F)


def test_block_threshold_is_half_rounded_up():
    assert block_threshold(10) == 5
    assert block_threshold(11) == 6
    assert block_threshold(3) == 2


# =============================================================================
# Committee
# =============================================================================

def test_committee_of_all_transacting_nodes():
    committee = committee_form(ring_transactions(14, 20), 4, 16, range(1, 101), RandomSource(1))
    assert committee == list(range(1, 15))


def test_committee_padding_is_seeded():
    tx = [Transaction("T_1_1", 3, 8, 10, 1)]
    first = committee_form(tx, 4, 16, range(1, 101), RandomSource(42))
    second = committee_form(tx, 4, 16, range(1, 101), RandomSource(42))
    assert first == second
    assert len(first) == 4
    assert {3, 8} <= set(first)


def test_committee_overflow_is_sampled():
    committee = committee_form(ring_transactions(30, 30), 4, 16, range(1, 101), RandomSource(3))
    assert len(committee) == 16
    assert set(committee) <= set(range(1, 31))


def test_committee_needs_transactions():
    with pytest.raises(NoTransactions):
        committee_form([], 4, 16, range(1, 101), RandomSource(1))


def test_attestation_all_valid():
    txs = ring_transactions(6, 8)
    committee = list(range(1, 7))
    result = attest_committee(committee, txs, publish_commitments(committee, txs), 4)
    assert result.passed == committee and result.evicted == []


def test_forging_dealer_is_evicted():
    txs = ring_transactions(6, 8)
    committee = list(range(1, 7))
    commitments = publish_commitments(committee, txs, forging={4})
    assert commitments[4] != dealer_commitment(4, txs)
    result = attest_committee(committee, txs, commitments, 4)
    assert result.evicted == [4]


def test_evictions_below_min_collapse():
    txs = ring_transactions(4, 6)
    committee = [1, 2, 3, 4]
    with pytest.raises(CommitteeCollapse):
        attest_committee(committee, txs, publish_commitments(committee, txs, forging={2}), 4)


# =============================================================================
# World
# =============================================================================

def small_world(honest, corrupt=0, seed=7, **overrides):
    """Ten nodes, all of them share recipients: honest first, then corrupt, the rest silent"""
    profiles = {}
    for node in range(1, 11):
        if node <= honest:
            profiles[node] = BehaviorProfile.parse("honest")
        elif node <= honest + corrupt:
            profiles[node] = BehaviorProfile.parse("corrupt_h_share:17")
        else:
            profiles[node] = BehaviorProfile.parse("silent")
    settings = WorldSettings(seed=seed, node_count=10, recipients=10, tx_per_interval=12, nbits=4,
                             strict=True, node_profiles=profiles, **overrides)
    return ConsortiumWorld(settings)


def consistent_submitters(session):
    count = 0
    for message in session.transcript.messages(PayloadKind.H_SHARE):
        if message.recipient is None and session.session.record(message.get("key")).h_share == message.get("value"):
            count += 1
    return count


@pytest.mark.parametrize("honest", range(0, 11))
def test_half_of_recipients_must_recover(honest):
    world = small_world(honest)
    outcome = run_block_interval(world, 1)
    assert outcome.threshold == 5
    assert outcome.block is not None
    if honest >= 5:
        assert outcome.status is BlockStatus.VALIDATED
        assert not outcome.block.timeout_validated
        assert consistent_submitters(outcome.final_session) >= 5
    else:
        assert outcome.status is BlockStatus.TIMEOUT_VALIDATED
        assert outcome.block.timeout_validated


def first_session_caught_cheating(honest, corrupt):
    """Interval outcome for the first seed whose opening recovery used a corrupt share"""
    for seed in range(1, 40):
        outcome = small_world(honest, corrupt=corrupt, seed=seed).run_block_interval(1)
        if outcome.sessions[0].reason is AbortReason.LEVEL1_MISMATCH:
            return outcome
    pytest.fail("every seed recovered from honest shares alone")


def test_cheaters_are_retried_out():
    outcome = first_session_caught_cheating(5, 5)
    assert outcome.status is BlockStatus.VALIDATED
    assert len(outcome.sessions) == 2
    assert outcome.sessions[1].recovered
    assert consistent_submitters(outcome.final_session) == 5


def test_too_few_honest_after_retry_times_out():
    outcome = small_world(4, corrupt=6).run_block_interval(1)
    assert outcome.status is BlockStatus.TIMEOUT_VALIDATED
    assert [s.reason for s in outcome.sessions] == [AbortReason.LEVEL1_MISMATCH, AbortReason.BELOW_THRESHOLD]


def test_recovered_secret_matches_block_transactions():
    world = small_world(10)
    outcome = world.run_block_interval(1)
    expected = encode_block_secret(BlockSecretInput.from_transactions(list(outcome.block.transactions)),
                                   outcome.threshold, 10, world.field)
    assert outcome.final_session.values == [c.value for c in expected.message]


def test_forging_dealer_transactions_left_out():
    world = small_world(10, forging_dealers={2})
    txs = ring_transactions(6, 8)
    outcome = world.run_block_interval(1, transactions=txs)
    assert outcome.evicted == [2]
    assert all(2 not in (tx.from_node, tx.to_node) for tx in outcome.block.transactions)
    assert len(outcome.block.transactions) == 4
    attestations = outcome.log.messages(PayloadKind.ATTESTATION)
    assert sum(1 for m in attestations if not m.get("passed")) == 1


def test_settings_validation():
    with pytest.raises(ConfigInvalid):
        ConsortiumWorld(WorldSettings(recipients=2))
    with pytest.raises(ConfigInvalid):
        ConsortiumWorld(WorldSettings(node_count=5, recipients=10))
    with pytest.raises(FieldTooSmall):
        ConsortiumWorld(WorldSettings(prime=199))


def test_chain_prime_floor_follows_config(monkeypatch):
    monkeypatch.setattr(config, "MIN_CHAIN_PRIME", 2 ** 20)
    with pytest.raises(FieldTooSmall, match="p >= 1048576, got 65537"):
        ConsortiumWorld(WorldSettings(prime=65537))
    secret_input = BlockSecretInput.from_transactions(ring_transactions(6, 8))
    with pytest.raises(FieldTooSmall, match="p >= 1048576, got 65537"):
        encode_block_secret(secret_input, 3, 6, mk_field(65537))


def test_ten_interval_world(tmp_path):
    world = ConsortiumWorld(WorldSettings(seed=11))
    outcomes = world.run(10)
    assert [o.status for o in outcomes] == [BlockStatus.VALIDATED] * 10
    assert world.store.height == 10
    assert validate_chain(world.store).clean

    first, second = tmp_path / "a.dat", tmp_path / "b.dat"
    save_store(world.store, str(first))
    again = ConsortiumWorld(WorldSettings(seed=11))
    again.run(10)
    save_store(again.store, str(second))
    assert first.read_bytes() == second.read_bytes()
    assert again.store.tip == world.store.tip

    data = first.read_bytes()
    needle = b'"tx_id":"T_4_1"'
    assert needle in data
    first.write_bytes(data.replace(needle, b'"tx_id":"T_4_Z"'))
    statuses = {e.height: e.status for e in validate_chain(load_store(str(first))).entries}
    assert statuses[3] == "valid"
    assert statuses[4] == "MerkleMismatch"
    assert all(statuses[h] == "InvalidAncestor" for h in range(5, 11))
