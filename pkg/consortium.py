"""
Consortium Module
Per-interval committee of dealers, transaction attestation, block-secret encoding
and the block interval loop that validates each block through a multisecret session

Interval k:
    1. collect the interval's transactions
    2. committee_form + attest_committee (forging dealers are evicted)
    3. encode_block_secret from the surviving transactions
    4. MSS session among m anonymous recipients with t = ceil(m/2)
    5. recovered secret checked against the public recomputation
    6. mine_block + append_block; timeout path flags the block
"""

import hashlib
import math
import struct
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set

import config
from chain import (
    Block, ChainStore, Transaction, ValidatedSecret, append_block, canonical_json, mine_block,
)
from errors import (
    BalanceMismatch, CommitteeCollapse, ConfigInvalid, FieldTooSmall, NoTransactions,
)
from field import FieldElement, PrimeField, mk_field
from logger import logger, print_block_summary, print_interval_header
from mss_core import SecretVector
from oneway import OneWayFn
from protocol import (
    HONEST, SYSTEM_ID, ActorId, BehaviorProfile, Message, PayloadKind, Role, SessionOutcome,
    Transcript, identify_cheaters, run_session,
)
from random_source import RandomSource
from sss_core import AbortReason, sss_setup


# =============================================================================
# Block secret encoding
# =============================================================================

@dataclass(frozen=True)
class BlockSecretInput:
    """(N_trans, N_peop, T_k, A_deb, A_cred) for one block interval"""

    n_trans: int
    n_peop: int
    t_concat: str
    a_deb: int
    a_cred: int

    def __post_init__(self):
        if self.a_deb != self.a_cred:
            raise BalanceMismatch(f"debited {self.a_deb} != credited {self.a_cred}")
        if self.n_peop > 2 * self.n_trans:
            raise ValueError(f"{self.n_peop} people cannot take part in {self.n_trans} transactions")

    @classmethod
    def from_transactions(cls, transactions: Sequence[Transaction]) -> "BlockSecretInput":
        people = {tx.from_node for tx in transactions} | {tx.to_node for tx in transactions}
        total = sum(tx.amount for tx in transactions)
        return cls(
            n_trans=len(transactions),
            n_peop=len(people),
            t_concat="".join(tx.tx_id for tx in transactions),
            a_deb=total,
            a_cred=total,
        )

    def canonical_bytes(self) -> bytes:
        return canonical_json({
            "n_trans": self.n_trans,
            "n_peop": self.n_peop,
            "t_concat": self.t_concat,
            "a_deb": self.a_deb,
            "a_cred": self.a_cred,
        })


def parity_weight(j: int, i: int, field: PrimeField) -> FieldElement:
    """Public weight w_{j,i} = j^i mod p"""
    return field(pow(j, i, field.modulus))


def parity_components(message: Sequence[FieldElement], m: int, field: PrimeField) -> List[FieldElement]:
    """parity_j = sum_i w_{j,i} s_i for j = t+1..m"""
    t = len(message)
    parity = []
    for j in range(t + 1, m + 1):
        acc = field.zero()
        for i, s in enumerate(message, start=1):
            acc = acc + parity_weight(j, i, field) * s
        parity.append(acc)
    return parity


def encode_block_secret(secret_input: BlockSecretInput, threshold_t: int, participant_count_m: int,
                        field: PrimeField) -> SecretVector:
    """
    Block secret s_{B_k}: t message components from a SHA-256 stream over the
    canonical input, followed by m - t parity components

    Args:
        secret_input: interval statistics
        threshold_t: message component count
        participant_count_m: total component count
        field: F_p with p >= MIN_CHAIN_PRIME

    Returns:
        SecretVector with k = t
    """
    min_prime = config.MIN_CHAIN_PRIME
    if field.modulus < min_prime:
        raise FieldTooSmall(f"block secrets need p >= {min_prime}, got {field.modulus}")
    if not 1 < threshold_t <= participant_count_m:
        raise ConfigInvalid(f"need 1 < t <= m, got t={threshold_t}, m={participant_count_m}")

    base = secret_input.canonical_bytes()
    message = [
        field(int.from_bytes(hashlib.sha256(base + struct.pack(">I", i)).digest(), 'big'))
        for i in range(threshold_t)
    ]
    parity = parity_components(message, participant_count_m, field)
    return SecretVector(tuple(message + parity), threshold_t)


def parity_checksum(message: Sequence[int], s_tilde: int, m: int, field: PrimeField) -> bool:
    """Recovered message plus its recomputed parity must sum to the published s~"""
    elements = [field(v) for v in message]
    total = field.zero()
    for c in elements + parity_components(elements, m, field):
        total = total + c
    return total == field(s_tilde)


# =============================================================================
# Committee of dealers
# =============================================================================

def committee_form(transactions: Sequence[Transaction], min_size: int, max_size: int,
                   population: Sequence[int], rng: RandomSource) -> List[int]:
    """
    Nodes involved in the interval's transactions, clipped to [min_size, max_size]

    Overflow is resolved by seeded sampling, underflow is padded with a seeded
    draw of non-transacting nodes from population.
    """
    if not transactions:
        raise NoTransactions("cannot form a committee for an empty interval")
    involved = sorted({tx.from_node for tx in transactions} | {tx.to_node for tx in transactions})
    if len(involved) > max_size:
        committee = rng.sample(involved, max_size)
    elif len(involved) < min_size:
        others = sorted(set(population) - set(involved))
        needed = min_size - len(involved)
        if needed > len(others):
            raise CommitteeCollapse(f"population too small to pad committee to {min_size}")
        committee = involved + rng.sample(others, needed)
    else:
        committee = involved
    return sorted(committee)


def dealer_transactions(dealer: int, transactions: Iterable[Transaction]) -> List[Transaction]:
    return sorted((tx for tx in transactions if dealer in (tx.from_node, tx.to_node)),
                  key=lambda tx: tx.tx_id)


def dealer_commitment(dealer: int, transactions: Iterable[Transaction]) -> bytes:
    """Digest of the dealer's transaction details, sorted by tx_id"""
    records = [tx.to_record() for tx in dealer_transactions(dealer, transactions)]
    return hashlib.sha256(canonical_json(records)).digest()


def publish_commitments(committee: Sequence[int], transactions: Sequence[Transaction],
                        forging: Iterable[int] = ()) -> Dict[int, bytes]:
    """Commitments as each dealer publishes them; a forging dealer inflates its first amount by 1"""
    forging = set(forging)
    commitments = {}
    for dealer in committee:
        if dealer in forging:
            records = [tx.to_record() for tx in dealer_transactions(dealer, transactions)]
            if records:
                records[0]["amount"] += 1
            else:
                records = [{"forged": dealer}]
            commitments[dealer] = hashlib.sha256(canonical_json(records)).digest()
        else:
            commitments[dealer] = dealer_commitment(dealer, transactions)
    return commitments


@dataclass
class AttestationResult:
    verdicts: Dict[int, bool]

    @property
    def passed(self) -> List[int]:
        return [d for d, ok in self.verdicts.items() if ok]

    @property
    def evicted(self) -> List[int]:
        return [d for d, ok in self.verdicts.items() if not ok]


def attest_committee(committee: Sequence[int], transactions: Sequence[Transaction],
                     commitments: Mapping[int, bytes], min_size: int = None) -> AttestationResult:
    """
    Check each dealer's published commitment against the recomputed digest

    Raises:
        CommitteeCollapse: evictions leave fewer than min_size dealers
    """
    if min_size is None:
        min_size = config.COMMITTEE_MIN_SIZE
    verdicts = {
        dealer: commitments.get(dealer) == dealer_commitment(dealer, transactions)
        for dealer in committee
    }
    result = AttestationResult(verdicts)
    for dealer in result.evicted:
        logger.warning(f"🚫 Dealer U_{dealer} failed attestation, evicted")
    if len(result.passed) < min_size:
        raise CommitteeCollapse(f"{len(result.passed)} dealers left, committee needs {min_size}")
    return result


# =============================================================================
# World
# =============================================================================

class BlockStatus(str, Enum):
    VALIDATED = "validated"
    TIMEOUT_VALIDATED = "timeout_validated"
    REJECTED = "rejected"
    NO_BLOCK = "no_block"


@dataclass
class WorldSettings:
    seed: int = config.DEFAULT_SEED
    node_count: int = config.DEFAULT_NODE_COUNT
    tx_per_interval: int = config.DEFAULT_TX_PER_INTERVAL
    recipients: int = config.DEFAULT_RECIPIENTS
    committee_min: int = config.COMMITTEE_MIN_SIZE
    committee_max: int = config.COMMITTEE_MAX_SIZE
    nbits: int = config.DEFAULT_NBITS
    prime: int = config.CHAIN_PRIME
    oneway: str = config.DEFAULT_ONEWAY
    strict: bool = config.STRICT_VERIFICATION
    tau0: int = config.TAU0_TICKS
    tau1: int = config.TAU1_TICKS
    node_profiles: Dict[int, BehaviorProfile] = dc_field(default_factory=dict)
    forging_dealers: Set[int] = dc_field(default_factory=set)

    def validate(self):
        if self.recipients < 3:
            raise ConfigInvalid("a block secret needs at least 3 recipients", field="chain.recipients")
        if self.recipients > self.node_count:
            raise ConfigInvalid("more recipients than nodes", field="chain.recipients")
        if self.node_count < 2:
            raise ConfigInvalid("a consortium needs at least 2 nodes", field="chain.nodes")
        if not 1 <= self.committee_min <= self.committee_max:
            raise ConfigInvalid("need 1 <= committee_min <= committee_max", field="chain.committee_min")
        if self.tau1 < 1 or self.tau0 < self.tau1:
            raise ConfigInvalid("need 1 <= tau1 <= tau0", field="ticks.tau1")
        if self.prime < config.MIN_CHAIN_PRIME:
            raise FieldTooSmall(f"block secrets need p >= {config.MIN_CHAIN_PRIME}, got {self.prime}")
        OneWayFn.parse(self.oneway, mk_field(self.prime))

    @property
    def threshold(self) -> int:
        return block_threshold(self.recipients)


def block_threshold(m: int) -> int:
    """At least half of the recipients, never below 2"""
    return max(2, math.ceil(m / 2))


@dataclass
class BlockOutcome:
    interval: int
    status: BlockStatus
    transactions: List[Transaction]
    committee: List[int] = dc_field(default_factory=list)
    evicted: List[int] = dc_field(default_factory=list)
    recipients: List[int] = dc_field(default_factory=list)
    threshold: int = 0
    sessions: List[SessionOutcome] = dc_field(default_factory=list)
    block: Optional[Block] = None
    log: Optional[Transcript] = None

    @property
    def final_session(self) -> Optional[SessionOutcome]:
        return self.sessions[-1] if self.sessions else None


class ConsortiumWorld:
    """Node population, workload generator and the chain they extend"""

    def __init__(self, settings: WorldSettings = None, store: ChainStore = None):
        self.settings = settings or WorldSettings()
        self.settings.validate()
        self.field = mk_field(self.settings.prime)
        self.store = store if store is not None else ChainStore()
        self.rng = RandomSource(self.settings.seed)
        self.population = list(range(1, self.settings.node_count + 1))
        self.outcomes: List[BlockOutcome] = []

    def workload(self, k: int) -> List[Transaction]:
        """Seeded transactions T_{k,1..n} among the population"""
        rng = self.rng.child(k, 1)
        base_tick = (k - 1) * self.settings.tau0
        transactions = []
        for j in range(1, self.settings.tx_per_interval + 1):
            sender = self.population[rng.below(len(self.population))]
            receiver = sender
            while receiver == sender:
                receiver = self.population[rng.below(len(self.population))]
            transactions.append(Transaction(
                tx_id=f"T_{k}_{j}",
                from_node=sender,
                to_node=receiver,
                amount=rng.between(1, config.MAX_AMOUNT),
                timestamp_tick=base_tick + j,
            ))
        return transactions

    def run(self, intervals: int) -> List[BlockOutcome]:
        start = len(self.outcomes) + 1
        for k in range(start, start + intervals):
            self.run_block_interval(k)
        return self.outcomes[-intervals:] if intervals else []

    def run_block_interval(self, k: int, transactions: Sequence[Transaction] = None) -> BlockOutcome:
        s = self.settings
        rng = self.rng.child(k)
        txs = list(transactions) if transactions is not None else self.workload(k)
        print_interval_header(k, len(txs))
        log = Transcript(strict=s.strict)

        committee = committee_form(txs, s.committee_min, s.committee_max, self.population, rng.child(2))
        commitments = publish_commitments(committee, txs, s.forging_dealers)
        attestation = attest_committee(committee, txs, commitments, s.committee_min)
        for dealer, ok in attestation.verdicts.items():
            _log_message(log, ActorId(Role.DEALER, dealer), SYSTEM_ID, PayloadKind.ATTESTATION,
                         k * s.tau0, passed=ok, commitment=commitments[dealer].hex())

        evicted = set(attestation.evicted)
        kept = [tx for tx in txs if tx.from_node not in evicted and tx.to_node not in evicted]
        outcome = BlockOutcome(k, BlockStatus.NO_BLOCK, kept, committee, sorted(evicted),
                               threshold=s.threshold, log=log)
        if not kept:
            logger.warning(f"⚠️ Interval {k}: every transaction belonged to an evicted dealer, no block")
            return self._record(outcome)

        secret_input = BlockSecretInput.from_transactions(kept)
        m, t = s.recipients, s.threshold
        secret = encode_block_secret(secret_input, t, m, self.field)
        outcome.recipients = rng.child(3).sample(self.population, m)
        params, oneway = sss_setup(self.field.modulus, t, m, oneway=s.oneway, rng=rng.child(4))
        profiles = {i: s.node_profiles.get(node, HONEST) for i, node in enumerate(outcome.recipients, start=1)}

        self._validation_sessions(outcome, params, oneway, secret, profiles, rng)
        session = outcome.final_session
        expected = [c.value for c in secret.message]

        if session.recovered:
            recomputed = encode_block_secret(BlockSecretInput.from_transactions(kept), t, m, self.field)
            if (session.values != [c.value for c in recomputed.message]
                    or not parity_checksum(session.values, session.s_tilde, m, self.field)):
                logger.error(f"❌ Interval {k}: recovered block secret does not match the transactions")
                outcome.status = BlockStatus.REJECTED
                return self._record(outcome)
            validated = ValidatedSecret(tuple(session.values))
            outcome.status = BlockStatus.VALIDATED
        else:
            logger.warning(f"⏰ Interval {k}: no recovery within tau1 "
                           f"({session.reason.value}), block taken as timeout-validated")
            validated = ValidatedSecret(tuple(expected), timeout_validated=True)
            outcome.status = BlockStatus.TIMEOUT_VALIDATED

        block = mine_block(self.store.tip_block, kept, validated, s.nbits, tick=k * s.tau0)
        append_block(self.store, block)
        _log_message(log, SYSTEM_ID, None, PayloadKind.BLOCK_PROPOSAL, k * s.tau0,
                     height=block.height, hash=block.hash_hex())
        outcome.block = block
        print_block_summary(block)
        return self._record(outcome)

    def _validation_sessions(self, outcome: BlockOutcome, params, oneway, secret: SecretVector,
                             profiles: Dict[int, BehaviorProfile], rng: RandomSource):
        """Run the session; in strict mode retry without identified cheaters while tau1 lasts"""
        s = self.settings
        active = set(range(1, params.participant_count_m + 1))
        budget = s.tau1
        retries = config.MAX_SESSION_RETRIES
        for attempt in range(retries + 1):
            seed = rng.child(5, attempt).below(2 ** 32)
            session = run_session(params, oneway, secret, profiles, active, seed,
                                  strict=s.strict, tick_budget=budget)
            outcome.sessions.append(session)
            if session.recovered or not s.strict or session.reason is not AbortReason.LEVEL1_MISMATCH:
                return
            cheaters = {a.index for a in identify_cheaters(session.transcript, session.session)}
            active -= cheaters
            budget -= session.ticks
            logger.warning(f"🕵️ Interval {outcome.interval}: {len(cheaters)} cheater(s) excluded, "
                           f"{budget} ticks left")
            if not active or budget < 1:
                return

    def _record(self, outcome: BlockOutcome) -> BlockOutcome:
        self.outcomes.append(outcome)
        return outcome


def _log_message(log: Transcript, sender: ActorId, recipient: Optional[ActorId], kind: PayloadKind,
                 tick: int, **body):
    message = Message(sender, recipient, kind, tuple(sorted(body.items())), tick, len(log.entries))
    log.record_send(message)


def run_block_interval(world: ConsortiumWorld, k: int, transactions: Sequence[Transaction] = None) -> BlockOutcome:
    """Validate and append the block of interval k"""
    return world.run_block_interval(k, transactions)
