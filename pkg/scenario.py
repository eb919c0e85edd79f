"""
Scenario Configuration Module
Loads run scenarios from dotenv-syntax files with dotted section keys

Grammar (one KEY=VALUE per line, '#' comments):
    scheme=single|multi|chain
    seed=42
    prime=199                      threshold=5      participants=11
    public_keys=7,5,4,3,2,9,6,8,11,10,12
    secret=7,9,2,3,7,5,4,9,3,21,27 message_bits=5
    oneway=modexp:3                strict=true      active=1,2,3,4,5
    profile.<i>=honest|silent|corrupt_h_share:<offset>|late:<ticks>
    ticks.tau0=600                 ticks.tau1=100
    chain.nodes=100                chain.intervals=10    chain.transactions=20
    chain.recipients=10            chain.committee_min=4 chain.committee_max=16
    chain.nbits=8                  chain.forging_dealers=3,7
    node.<id>=<behavior>
    output.transcript=run.jsonl    output.view=public|private
    output.chain=chain.dat
"""

import io
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional

from dotenv import dotenv_values

import config
from consortium import WorldSettings
from errors import ConfigInvalid, ShareChainError
from logger import logger
from mss_core import SecretVector, mss_derive
from protocol import BehaviorProfile
from random_source import RandomSource
from sss_core import sss_setup

SCHEMES = ("single", "multi", "chain")
VIEWS = ("public", "private")

# key -> (attribute, kind)
SIMPLE_KEYS = {
    "scheme": ("scheme", "str"),
    "seed": ("seed", "int"),
    "prime": ("prime", "int"),
    "threshold": ("threshold", "int"),
    "participants": ("participants", "int"),
    "public_keys": ("public_keys", "ints"),
    "secret": ("secret", "ints"),
    "message_bits": ("message_bits", "int"),
    "oneway": ("oneway", "str"),
    "strict": ("strict", "bool"),
    "active": ("active", "ints"),
    "ticks.tau0": ("tau0", "int"),
    "ticks.tau1": ("tau1", "int"),
    "chain.nodes": ("chain_nodes", "int"),
    "chain.intervals": ("chain_intervals", "int"),
    "chain.transactions": ("chain_transactions", "int"),
    "chain.recipients": ("chain_recipients", "int"),
    "chain.committee_min": ("committee_min", "int"),
    "chain.committee_max": ("committee_max", "int"),
    "chain.nbits": ("nbits", "int"),
    "chain.forging_dealers": ("forging_dealers", "ints"),
    "output.transcript": ("transcript_path", "str"),
    "output.view": ("transcript_view", "str"),
    "output.chain": ("chain_path", "str"),
}


def _line_of(text: str, key: str) -> Optional[int]:
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("export "):
            stripped = stripped[len("export "):].lstrip()
        if stripped.split("=", 1)[0].strip() == key:
            return number
    return None


def _convert(raw: str, kind: str):
    if kind == "str":
        return raw.strip()
    if kind == "int":
        return int(raw.strip(), 0)
    if kind == "bool":
        value = raw.strip().lower()
        if value in ("1", "true", "yes", "on"):
            return True
        if value in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return [int(v.strip(), 0) for v in raw.split(",") if v.strip()]


def _render(value, kind: str) -> str:
    if kind == "bool":
        return "true" if value else "false"
    if kind == "ints":
        return ",".join(str(v) for v in value)
    return str(value)


@dataclass
class ScenarioConfig:
    """A run request for the CLI: one session (single/multi) or a chain world"""

    scheme: str = "single"
    seed: int = config.DEFAULT_SEED
    prime: Optional[int] = None
    threshold: Optional[int] = None
    participants: Optional[int] = None
    public_keys: Optional[List[int]] = None
    secret: Optional[List[int]] = None
    message_bits: Optional[int] = None
    oneway: str = config.DEFAULT_ONEWAY
    strict: bool = config.STRICT_VERIFICATION
    active: Optional[List[int]] = None
    profiles: Dict[int, BehaviorProfile] = dc_field(default_factory=dict)
    tau0: int = config.TAU0_TICKS
    tau1: int = config.TAU1_TICKS
    chain_nodes: int = config.DEFAULT_NODE_COUNT
    chain_intervals: int = 1
    chain_transactions: int = config.DEFAULT_TX_PER_INTERVAL
    chain_recipients: int = config.DEFAULT_RECIPIENTS
    committee_min: int = config.COMMITTEE_MIN_SIZE
    committee_max: int = config.COMMITTEE_MAX_SIZE
    nbits: int = config.DEFAULT_NBITS
    forging_dealers: List[int] = dc_field(default_factory=list)
    node_profiles: Dict[int, BehaviorProfile] = dc_field(default_factory=dict)
    transcript_path: Optional[str] = None
    transcript_view: str = "public"
    chain_path: Optional[str] = None

    # =========================================================================
    # Parsing
    # =========================================================================

    @classmethod
    def load(cls, path: str) -> "ScenarioConfig":
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigInvalid(f"cannot read scenario {path}: {e}")
        scenario = cls.parse(text)
        logger.info(f"📋 Loaded {scenario.scheme} scenario from {path}")
        return scenario

    @classmethod
    def parse(cls, text: str) -> "ScenarioConfig":
        """Parse and validate scenario text"""
        values = dotenv_values(stream=io.StringIO(text), interpolate=False)
        scenario = cls()
        for key, raw in values.items():
            line = _line_of(text, key)
            if raw is None:
                raise ConfigInvalid(f"key '{key}' has no value", line=line, field=key)
            try:
                scenario._assign(key, raw)
            except ConfigInvalid as e:
                raise ConfigInvalid(e.detail, line=line, field=e.field or key)
            except ValueError as e:
                raise ConfigInvalid(f"bad value for '{key}': {e}", line=line, field=key)
        scenario.validate()
        return scenario

    def _assign(self, key: str, raw: str):
        if key in SIMPLE_KEYS:
            attr, kind = SIMPLE_KEYS[key]
            setattr(self, attr, _convert(raw, kind))
            return
        section, _, index = key.partition(".")
        if section in ("profile", "node") and index.isdigit():
            target = self.profiles if section == "profile" else self.node_profiles
            target[int(index)] = BehaviorProfile.parse(raw)
            return
        raise ConfigInvalid(f"unknown key '{key}'")

    # =========================================================================
    # Validation
    # =========================================================================

    def validate(self):
        """Check every downstream constraint now instead of mid-run"""
        if self.scheme not in SCHEMES:
            raise ConfigInvalid(f"scheme must be one of {SCHEMES}", field="scheme")
        if self.transcript_view not in VIEWS:
            raise ConfigInvalid(f"output.view must be one of {VIEWS}", field="output.view")
        try:
            if self.scheme == "chain":
                self.world_settings().validate()
                if self.chain_intervals < 1:
                    raise ConfigInvalid("chain.intervals must be positive", field="chain.intervals")
            else:
                self._validate_session()
        except ConfigInvalid:
            raise
        except (ShareChainError, ValueError) as e:
            raise ConfigInvalid(f"{type(e).__name__}: {e}")

    def _validate_session(self):
        for name in ("prime", "threshold", "participants", "secret"):
            if getattr(self, name) is None:
                raise ConfigInvalid(f"'{name}' is required for scheme {self.scheme}", field=name)
        params, oneway = self.scheme_params()
        m = self.participants
        if any(not 1 <= i <= m for i in self.profiles):
            raise ConfigInvalid(f"profile index outside 1..{m}", field="profile")
        if self.active is not None and (not self.active or any(not 1 <= i <= m for i in self.active)):
            raise ConfigInvalid(f"active must list participants in 1..{m}", field="active")
        if self.scheme == "single":
            if len(self.secret) != 1:
                raise ConfigInvalid("single scheme takes exactly one secret value", field="secret")
        else:
            mss_derive(self.secret_vector(params), params, oneway)

    # =========================================================================
    # Builders
    # =========================================================================

    def scheme_params(self):
        return sss_setup(self.prime, self.threshold, self.participants, self.public_keys,
                         self.oneway, RandomSource(self.seed).child(0))

    def secret_vector(self, params):
        k = self.message_bits if self.message_bits is not None else self.threshold
        return SecretVector.from_ints(params.field, self.secret, k)

    def active_set(self) -> List[int]:
        if self.active is not None:
            return list(self.active)
        return list(range(1, self.participants + 1))

    def world_settings(self):
        return WorldSettings(
            seed=self.seed,
            node_count=self.chain_nodes,
            tx_per_interval=self.chain_transactions,
            recipients=self.chain_recipients,
            committee_min=self.committee_min,
            committee_max=self.committee_max,
            nbits=self.nbits,
            prime=self.prime if self.prime is not None else config.CHAIN_PRIME,
            oneway=self.oneway,
            strict=self.strict,
            tau0=self.tau0,
            tau1=self.tau1,
            node_profiles=dict(self.node_profiles),
            forging_dealers=set(self.forging_dealers),
        )

    # =========================================================================
    # Serialization
    # =========================================================================

    def to_text(self) -> str:
        """Re-serialize; parse(to_text()) reproduces this config"""
        defaults = ScenarioConfig()
        lines = []
        for key, (attr, kind) in SIMPLE_KEYS.items():
            value = getattr(self, attr)
            if value is None or (key != "scheme" and value == getattr(defaults, attr)):
                continue
            lines.append(f"{key}={_render(value, kind)}")
        lines.extend(f"profile.{i}={p}" for i, p in sorted(self.profiles.items()))
        lines.extend(f"node.{i}={p}" for i, p in sorted(self.node_profiles.items()))
        return "\n".join(lines) + "\n"
