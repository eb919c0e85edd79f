"""
Protocol Simulation Module
Deterministic discrete-event simulation of the system and m participants exchanging
messages over a simulated target-anonymous channel

Flow (logical ticks, one simpy time unit each):
    0   system -> each participant: HShare (private); MSS: PublicValue(s~) broadcast
    1   active participants broadcast their h-share into the recovery pool
    ..  once the pool first holds t shares, the member with the smallest alias
        interpolates h from the first t shares (alias order) and sends HRecoveryClaim
    ..  system verifies; Reject, or FShareRelease broadcast + private FShare messages
    ..  released members forward their FShare to the combiner, which recovers
"""

import json
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Set, Tuple, Union

import simpy

import config
from errors import ConfigInvalid, ModeUnavailable
from field import FieldElement
from logger import logger
from mss_core import SecretVector, mss_build_session, mss_recover_secrets
from oneway import OneWayFn
from poly import EvalPoint, Polynomial
from random_source import RandomSource
from sss_core import (
    AbortReason, SchemeParams, SharingSession, Verdict, level2_polynomial,
    sss_generate, sss_level1_recover, sss_verify_and_release,
)


# =============================================================================
# Identities and messages
# =============================================================================

class Role(str, Enum):
    DEALER = "Dealer"
    SYSTEM = "System"
    PARTICIPANT = "Participant"
    NODE = "Node"


@dataclass(frozen=True)
class ActorId:
    """Actor identity; participants and nodes are known publicly only by alias"""

    role: Role
    index: int = 0
    alias: str = ""

    @property
    def anonymous(self) -> bool:
        return self.role in (Role.PARTICIPANT, Role.NODE)

    @property
    def public_name(self) -> str:
        if self.anonymous:
            return self.alias
        return self.role.value.lower() if self.role is Role.SYSTEM else f"{self.role.value.lower()}-{self.index}"

    @property
    def private_name(self) -> str:
        return f"{self.role.value}({self.index})"


SYSTEM_ID = ActorId(Role.SYSTEM)


class PayloadKind(str, Enum):
    H_SHARE = "HShare"
    H_RECOVERY_CLAIM = "HRecoveryClaim"
    F_SHARE_RELEASE = "FShareRelease"
    F_SHARE = "FShare"
    PUBLIC_VALUE = "PublicValue"
    REJECT = "Reject"
    BLOCK_PROPOSAL = "BlockProposal"
    ATTESTATION = "Attestation"


# Body fields that survive in the public transcript view
PUBLIC_FIELDS = {
    PayloadKind.PUBLIC_VALUE: ("name", "value"),
    PayloadKind.F_SHARE_RELEASE: ("recipients",),
    PayloadKind.BLOCK_PROPOSAL: ("height", "hash"),
    PayloadKind.ATTESTATION: ("passed",),
}


@dataclass(frozen=True)
class Message:
    """Immutable message; recipient None means broadcast"""

    sender: ActorId
    recipient: Optional[ActorId]
    kind: PayloadKind
    body: Tuple[Tuple[str, Any], ...]
    logical_time: int
    seq: int

    def get(self, name: str, default=None):
        return dict(self.body).get(name, default)

    @property
    def payload(self) -> Dict[str, Any]:
        return dict(self.body)


def _freeze(value):
    if isinstance(value, FieldElement):
        return value.value
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


# =============================================================================
# Behavior profiles
# =============================================================================

class BehaviorKind(str, Enum):
    HONEST = "honest"
    CORRUPT_H_SHARE = "corrupt_h_share"
    SILENT = "silent"
    LATE = "late"


@dataclass(frozen=True)
class BehaviorProfile:
    """How a participant acts once it holds its h-share"""

    kind: BehaviorKind = BehaviorKind.HONEST
    offset: int = 0
    delay: int = 0

    @classmethod
    def parse(cls, text: str) -> "BehaviorProfile":
        """'honest', 'silent', 'corrupt_h_share:<offset>' or 'late:<ticks>'"""
        name, _, arg = text.strip().lower().partition(":")
        try:
            kind = BehaviorKind(name)
        except ValueError:
            raise ConfigInvalid(f"unknown behavior '{text}'")
        if kind is BehaviorKind.CORRUPT_H_SHARE:
            return cls(kind, offset=int(arg) if arg else 1)
        if kind is BehaviorKind.LATE:
            if not arg or int(arg) < 0:
                raise ConfigInvalid(f"late behavior needs a nonnegative delay: '{text}'")
            return cls(kind, delay=int(arg))
        if arg:
            raise ConfigInvalid(f"behavior '{name}' takes no argument")
        return cls(kind)

    def __str__(self):
        if self.kind is BehaviorKind.CORRUPT_H_SHARE:
            return f"{self.kind.value}:{self.offset}"
        if self.kind is BehaviorKind.LATE:
            return f"{self.kind.value}:{self.delay}"
        return self.kind.value

    @property
    def submits(self) -> bool:
        return self.kind is not BehaviorKind.SILENT


HONEST = BehaviorProfile()


# =============================================================================
# Transcript
# =============================================================================

@dataclass
class TranscriptEntry:
    message: Message
    delivered_tick: Optional[int] = None
    delivery_rank: Optional[int] = None


class Transcript:
    """Append-only record of every sent message plus per-tick actor snapshots"""

    def __init__(self, strict: bool):
        self.strict = strict
        self.entries: List[TranscriptEntry] = []
        self.snapshots: List[Dict[str, Any]] = []
        self._by_seq: Dict[int, TranscriptEntry] = {}

    def record_send(self, message: Message):
        entry = TranscriptEntry(message)
        self.entries.append(entry)
        self._by_seq[message.seq] = entry

    def record_delivery(self, message: Message, tick: int, rank: int):
        entry = self._by_seq[message.seq]
        entry.delivered_tick = tick
        entry.delivery_rank = rank

    def record_snapshot(self, tick: int, state: Dict[str, Any]):
        self.snapshots.append({"tick": tick, "state": state})

    def messages(self, kind: PayloadKind = None) -> List[Message]:
        return [e.message for e in self.entries if kind is None or e.message.kind is kind]

    def index_of_first(self, kind: PayloadKind) -> Optional[int]:
        for i, e in enumerate(self.entries):
            if e.message.kind is kind:
                return i
        return None

    def to_records(self, view: str = "public") -> List[Dict[str, Any]]:
        if view not in ("public", "private"):
            raise ValueError(f"unknown transcript view '{view}'")
        records = []
        for e in self.entries:
            msg = e.message
            body = msg.payload
            if view == "public":
                allowed = PUBLIC_FIELDS.get(msg.kind, ())
                body = {k: v for k, v in body.items() if k in allowed}
                sender = msg.sender.public_name
                recipient = msg.recipient.public_name if msg.recipient else "*"
            else:
                sender = f"{msg.sender.private_name}/{msg.sender.public_name}"
                recipient = f"{msg.recipient.private_name}/{msg.recipient.public_name}" if msg.recipient else "*"
            records.append({
                "record": "message",
                "seq": msg.seq,
                "sent": msg.logical_time,
                "delivered": e.delivered_tick,
                "rank": e.delivery_rank,
                "from": sender,
                "to": recipient,
                "kind": msg.kind.value,
                "body": {k: _jsonable(v) for k, v in body.items()},
            })
        if view == "private":
            records.extend({"record": "snapshot", **snap} for snap in self.snapshots)
        return records

    def export_lines(self, view: str = "public") -> List[str]:
        """Line-delimited JSON, canonical key order"""
        return [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in self.to_records(view)]

    def write(self, path: str, view: str = "public"):
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for line in self.export_lines(view):
                f.write(line + "\n")


# =============================================================================
# Channel
# =============================================================================

class AnonymousChannel:
    """
    Target-anonymous channel simulation

    A message sent at tick T is delivered at T + 1. Messages due in the same
    tick are delivered in a seeded shuffle; a broadcast reaches every
    registered actor, sender included.
    """

    def __init__(self, env: simpy.Environment, rng: RandomSource, transcript: Transcript):
        self.env = env
        self.rng = rng
        self.transcript = transcript
        self.actors: Dict[ActorId, Any] = {}
        self.last_tick = 0
        self._pending: Dict[int, List[Message]] = {}
        self._seq = 0

    def register(self, actor):
        self.actors[actor.actor_id] = actor

    def send(self, sender: ActorId, recipient: Optional[ActorId], kind: PayloadKind, **body) -> Message:
        message = Message(
            sender=sender,
            recipient=recipient,
            kind=kind,
            body=tuple(sorted((k, _freeze(v)) for k, v in body.items())),
            logical_time=int(self.env.now),
            seq=self._seq,
        )
        self._seq += 1
        self.transcript.record_send(message)
        self.deliver(message)
        return message

    def deliver(self, message: Message):
        """Schedule delivery at the next tick"""
        due = int(self.env.now) + 1
        if due not in self._pending:
            self._pending[due] = []
            self.env.process(self._deliver_batch(due))
        self._pending[due].append(message)

    def _deliver_batch(self, tick: int):
        yield self.env.timeout(tick - self.env.now)
        batch = self._pending.pop(tick)
        self.last_tick = tick
        for rank, message in enumerate(self.rng.shuffled(batch)):
            self.transcript.record_delivery(message, tick, rank)
            if message.recipient is None:
                targets = list(self.actors.values())
            else:
                targets = [self.actors[message.recipient]]
            for actor in targets:
                actor.handle(message)
        for actor in self.actors.values():
            actor.on_tick_end(tick)
        self.transcript.record_snapshot(tick, {
            actor.actor_id.public_name: actor.snapshot() for actor in self.actors.values()
        })


# =============================================================================
# Actors
# =============================================================================

class SystemActor:
    """Holds the session, distributes h-shares and gates the f-shares"""

    def __init__(self, channel: AnonymousChannel, session: SharingSession,
                 participants: Dict[int, ActorId], s_tilde: Optional[FieldElement] = None):
        self.actor_id = SYSTEM_ID
        self.channel = channel
        self.session = session
        self.participants = participants
        self.s_tilde = s_tilde
        self.submissions: Dict[int, int] = {}
        self.verdict: Optional[Verdict] = None
        self._owner_of = {session.params.public_keys[i - 1].value: aid for i, aid in participants.items()}

    def start(self):
        if self.s_tilde is not None:
            self.channel.send(self.actor_id, None, PayloadKind.PUBLIC_VALUE, name="s_tilde", value=self.s_tilde)
        for index, aid in self.participants.items():
            record = self.session.record(self.session.params.public_keys[index - 1])
            self.channel.send(self.actor_id, aid, PayloadKind.H_SHARE,
                              key=record.public_key, value=record.h_share)

    def handle(self, message: Message):
        if message.kind is PayloadKind.H_SHARE and message.recipient is None:
            self.submissions.setdefault(message.get("key"), message.get("value"))
        elif message.kind is PayloadKind.H_RECOVERY_CLAIM and self.verdict is None:
            self._judge(message)

    def _judge(self, claim: Message):
        params = self.session.params
        members = list(claim.get("members"))
        used = list(claim.get("used"))
        h_coeffs = claim.get("h_coeffs")
        claimed = Polynomial.from_ints(params.field, h_coeffs) if h_coeffs else claim.get("claimed")
        submissions = None
        if self.session.strict:
            submissions = {k: self.submissions[k] for k in members if k in self.submissions}

        self.verdict = sss_verify_and_release(self.session, claimed, members,
                                              submissions=submissions, used_keys=used)
        if not self.verdict.accepted:
            self.channel.send(self.actor_id, None, PayloadKind.REJECT,
                              reason=self.verdict.reason.value,
                              cheaters=sorted(self.verdict.cheaters))
            return

        recipients = [self._owner_of[p.x.value] for p in self.verdict.released]
        self.channel.send(self.actor_id, None, PayloadKind.F_SHARE_RELEASE,
                          recipients=sorted(r.alias for r in recipients))
        for point, aid in zip(self.verdict.released, recipients):
            self.channel.send(self.actor_id, aid, PayloadKind.F_SHARE, key=point.x, value=point.y)

    def on_tick_end(self, tick: int):
        pass

    def snapshot(self) -> Dict[str, Any]:
        return {
            "submissions": len(self.submissions),
            "verdict": self.verdict.status.value if self.verdict else None,
        }


class ParticipantActor:
    """One share holder P_i following its behavior profile"""

    def __init__(self, channel: AnonymousChannel, actor_id: ActorId, params: SchemeParams,
                 behavior: BehaviorProfile, active: bool, strict: bool):
        self.actor_id = actor_id
        self.channel = channel
        self.params = params
        self.behavior = behavior
        self.active = active
        self.strict = strict
        self.h_share: Optional[Tuple[int, int]] = None
        self.s_tilde: Optional[int] = None
        self.submitted = False
        self.pool: Dict[str, Tuple[int, int]] = {}
        self.convened = False
        self.combiner: Optional[str] = None
        self.f_share: Optional[Tuple[int, int]] = None
        self.f_pool: Dict[int, int] = {}
        self.recovered_f: Optional[Polynomial] = None
        self.rejected = False

    @property
    def env(self) -> simpy.Environment:
        return self.channel.env

    @property
    def is_combiner(self) -> bool:
        return self.combiner == self.actor_id.alias

    def handle(self, message: Message):
        kind = message.kind
        if kind is PayloadKind.PUBLIC_VALUE and message.get("name") == "s_tilde":
            self.s_tilde = message.get("value")
        elif kind is PayloadKind.H_SHARE and message.recipient is not None:
            self.h_share = (message.get("key"), message.get("value"))
            if self.active and self.behavior.submits:
                if self.behavior.delay:
                    self.env.process(self._submit_later(self.behavior.delay))
                else:
                    self._submit()
        elif kind is PayloadKind.H_SHARE and message.sender.role is Role.PARTICIPANT:
            if not self.convened:
                self.pool[message.sender.alias] = (message.get("key"), message.get("value"))
        elif kind is PayloadKind.F_SHARE and message.sender.role is Role.SYSTEM:
            self.f_share = (message.get("key"), message.get("value"))
            if self.is_combiner:
                self.f_pool[self.f_share[0]] = self.f_share[1]
            else:
                combiner_id = next(a for a in self.channel.actors if a.alias == self.combiner)
                self.channel.send(self.actor_id, combiner_id, PayloadKind.F_SHARE,
                                  key=self.f_share[0], value=self.f_share[1])
        elif kind is PayloadKind.F_SHARE and self.is_combiner:
            self.f_pool[message.get("key")] = message.get("value")
        elif kind is PayloadKind.REJECT:
            self.rejected = True

    def _submit(self):
        key, value = self.h_share
        if self.behavior.kind is BehaviorKind.CORRUPT_H_SHARE:
            value = (value + self.behavior.offset) % self.params.field.modulus
        self.submitted = True
        self.channel.send(self.actor_id, None, PayloadKind.H_SHARE, key=key, value=value)

    def _submit_later(self, delay: int):
        yield self.env.timeout(delay)
        self._submit()

    def on_tick_end(self, tick: int):
        t = self.params.threshold_t
        if not self.convened and len(self.pool) >= t:
            self.convened = True
            self.combiner = min(self.pool)
            if self.is_combiner:
                self._send_claim()
        if self.is_combiner and self.recovered_f is None and len(self.f_pool) >= t:
            field = self.params.field
            points = [EvalPoint.from_ints(field, k, v) for k, v in sorted(self.f_pool.items())[:t]]
            self.recovered_f = level2_polynomial(points, t)
            logger.debug(f"Combiner {self.actor_id.alias} recovered f at tick {tick}")

    def _send_claim(self):
        t = self.params.threshold_t
        field = self.params.field
        used_aliases = sorted(self.pool)[:t]
        points = [EvalPoint.from_ints(field, *self.pool[a]) for a in used_aliases]
        recovered_h, claimed = sss_level1_recover(points, t)
        self.channel.send(
            self.actor_id, SYSTEM_ID, PayloadKind.H_RECOVERY_CLAIM,
            claimed=claimed,
            members=sorted(k for k, _ in self.pool.values()),
            used=sorted(p.x.value for p in points),
            h_coeffs=recovered_h.as_ints() if self.strict else (),
        )

    def snapshot(self) -> Dict[str, Any]:
        return {
            "h": self.h_share is not None,
            "submitted": self.submitted,
            "f": self.f_share is not None,
            "recovered": self.recovered_f is not None,
        }


# =============================================================================
# Sessions
# =============================================================================

class OutcomeStatus(str, Enum):
    RECOVERED = "Recovered"
    ABORTED = "Aborted"


@dataclass
class SessionOutcome:
    status: OutcomeStatus
    transcript: Transcript
    session: SharingSession
    participants: Dict[int, ActorId]
    ticks: int
    values: List[int] = dc_field(default_factory=list)
    reason: Optional[AbortReason] = None
    s_tilde: Optional[int] = None

    @property
    def recovered(self) -> bool:
        return self.status is OutcomeStatus.RECOVERED

    def summary(self, reveal: bool = False) -> str:
        if self.recovered:
            values = self.values if reveal else "<hidden, use --reveal>"
            return f"Recovered after {self.ticks} ticks: {values}"
        return f"Aborted({self.reason.value}) after {self.ticks} ticks"


def _make_aliases(rng: RandomSource, count: int) -> List[str]:
    aliases: List[str] = []
    while len(aliases) < count:
        alias = f"anon-{rng.token(config.ALIAS_BYTES)}"
        if alias not in aliases:
            aliases.append(alias)
    return aliases


def _check_session_config(params: SchemeParams, profiles: Mapping[int, BehaviorProfile],
                          active_subset: Iterable[int]) -> Tuple[Dict[int, BehaviorProfile], Set[int]]:
    m = params.participant_count_m
    profiles = {int(i): p for i, p in profiles.items()}
    unknown = [i for i in profiles if not 1 <= i <= m]
    if unknown:
        raise ConfigInvalid(f"profiles name participants outside 1..{m}: {sorted(unknown)}", field="profiles")
    active = {int(i) for i in active_subset}
    if not active:
        raise ConfigInvalid("active subset is empty", field="active")
    if any(not 1 <= i <= m for i in active):
        raise ConfigInvalid(f"active subset names participants outside 1..{m}", field="active")
    full = {i: profiles.get(i, HONEST) for i in range(1, m + 1)}
    return full, active


def run_session(params: SchemeParams, oneway: OneWayFn, secret: Union[SecretVector, FieldElement, int],
                profiles: Mapping[int, BehaviorProfile], active_subset: Iterable[int], seed: int,
                strict: bool = None, tick_budget: int = None) -> SessionOutcome:
    """
    Run one two-level session as a protocol

    Args:
        params, oneway: public scheme context
        secret: a single field element, or a SecretVector for the multisecret scheme
        profiles: participant index (1-based) -> behavior; missing entries are honest
        active_subset: participant indices that take part in recovery
        seed: drives the dealer's randomness, aliases and delivery order
        strict: per-share verification (enables identify_cheaters)
        tick_budget: tau_1 in ticks

    Returns:
        SessionOutcome, Recovered with the recovered values or Aborted with a reason
    """
    if strict is None:
        strict = config.STRICT_VERIFICATION
    if tick_budget is None:
        tick_budget = config.TAU1_TICKS
    if tick_budget < 1:
        raise ConfigInvalid(f"tick budget must be positive, got {tick_budget}", field="ticks.tau1")
    profiles, active = _check_session_config(params, profiles, active_subset)

    root = RandomSource(seed)
    multi = isinstance(secret, SecretVector)
    s_tilde = None
    if multi:
        session, derived = mss_build_session(secret, params, oneway, strict)
        s_tilde = derived.s_tilde
    else:
        session = sss_generate(params, oneway, secret, root.child(1), strict)

    env = simpy.Environment()
    transcript = Transcript(strict)
    channel = AnonymousChannel(env, root.child(2), transcript)

    aliases = _make_aliases(root.child(3), params.participant_count_m)
    participants = {
        i: ActorId(Role.PARTICIPANT, i, aliases[i - 1]) for i in range(1, params.participant_count_m + 1)
    }
    system = SystemActor(channel, session, participants, s_tilde)
    channel.register(system)
    actors = {}
    for i, aid in participants.items():
        actors[i] = ParticipantActor(channel, aid, params, profiles[i], i in active, strict)
        channel.register(actors[i])

    system.start()
    env.run(until=tick_budget)
    pending = env.peek() != float('inf')

    combiner = next((a for a in actors.values() if a.is_combiner), None)
    outcome = SessionOutcome(
        status=OutcomeStatus.ABORTED,
        transcript=transcript,
        session=session,
        participants=participants,
        ticks=channel.last_tick,
        s_tilde=s_tilde.value if s_tilde is not None else None,
    )
    if combiner is not None and combiner.recovered_f is not None:
        outcome.status = OutcomeStatus.RECOVERED
        if multi:
            recovered = mss_recover_secrets(combiner.recovered_f, params.field(combiner.s_tilde),
                                            secret.message_bits_k)
            outcome.values = [v.value for v in recovered]
        else:
            outcome.values = [combiner.recovered_f.constant.value]
    elif system.verdict is not None and not system.verdict.accepted:
        outcome.reason = system.verdict.reason
    else:
        outcome.reason = AbortReason.TIMEOUT if pending else AbortReason.BELOW_THRESHOLD

    logger.info(f"📜 Session {outcome.summary()}, {len(transcript.entries)} messages")
    return outcome


def identify_cheaters(transcript: Transcript, session: SharingSession) -> Set[ActorId]:
    """Participants whose posted h-share differs from the system's stored record"""
    if not transcript.strict:
        raise ModeUnavailable("cheater identification needs a session run in strict mode")
    cheaters = set()
    for message in transcript.messages(PayloadKind.H_SHARE):
        if message.recipient is not None or message.sender.role is not Role.PARTICIPANT:
            continue
        record = session.record(message.get("key"))
        if message.get("value") != record.h_share.value:
            cheaters.add(message.sender)
    return cheaters
