"""
Chain Module
Transactions, Merkle roots, proof-of-work header sealing, fork-aware
longest-chain storage, validation reports and length-prefixed persistence
"""

import hashlib
import json
import os
import struct
from collections import deque
from dataclasses import dataclass, field as dc_field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import config
from errors import (
    ChainError, CorruptStore, DifficultyTooHigh, EmptyBlock, InvalidHeight, InvalidPoW,
    MerkleMismatch, OrphanParent, StoreNotFound, UnvalidatedSecret,
)
from logger import logger

GENESIS_HASH = bytes(32)
HEADER_STRUCT = struct.Struct(">IQIQ")   # version, timestamp, nbits, nonce
LENGTH_PREFIX = struct.Struct(">I")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode('utf-8')


# =============================================================================
# Transactions
# =============================================================================

@dataclass(frozen=True)
class Transaction:
    """One transfer T_{k,j} between two nodes"""

    tx_id: str
    from_node: int
    to_node: int
    amount: int
    timestamp_tick: int

    def __post_init__(self):
        if self.amount < 0:
            raise ValueError(f"transaction {self.tx_id} has negative amount {self.amount}")

    def to_record(self) -> Dict:
        return {
            "tx_id": self.tx_id,
            "from": self.from_node,
            "to": self.to_node,
            "amount": self.amount,
            "timestamp": self.timestamp_tick,
        }

    @classmethod
    def from_record(cls, record: Dict) -> "Transaction":
        return cls(record["tx_id"], int(record["from"]), int(record["to"]),
                   int(record["amount"]), int(record["timestamp"]))

    def canonical_bytes(self) -> bytes:
        return canonical_json(self.to_record())

    def digest(self) -> bytes:
        return sha256(self.canonical_bytes())


def merkle_root(transactions: Sequence[Transaction]) -> bytes:
    """
    Binary Merkle tree over SHA-256 leaves

    A lone leaf is hashed once more to form the root; odd layers
    duplicate their last node.
    """
    if not transactions:
        raise EmptyBlock("cannot build a Merkle root without transactions")
    layer = [tx.digest() for tx in transactions]
    if len(layer) == 1:
        return sha256(layer[0])
    while len(layer) > 1:
        if len(layer) % 2:
            layer.append(layer[-1])
        layer = [sha256(layer[i] + layer[i + 1]) for i in range(0, len(layer), 2)]
    return layer[0]


# =============================================================================
# Blocks
# =============================================================================

@dataclass(frozen=True)
class BlockHeader:
    version: int
    merkle_root: bytes
    timestamp_tick: int
    nbits: int
    nonce: int
    parent_hash: bytes
    secret_digest: bytes

    def serialize(self) -> bytes:
        return (HEADER_STRUCT.pack(self.version, self.timestamp_tick, self.nbits, self.nonce)
                + self.merkle_root + self.parent_hash + self.secret_digest)

    def hash(self) -> bytes:
        return sha256(self.serialize())

    def to_record(self) -> Dict:
        return {
            "version": self.version,
            "merkle_root": self.merkle_root.hex(),
            "timestamp": self.timestamp_tick,
            "nbits": self.nbits,
            "nonce": self.nonce,
            "parent_hash": self.parent_hash.hex(),
            "secret_digest": self.secret_digest.hex(),
        }

    @classmethod
    def from_record(cls, record: Dict) -> "BlockHeader":
        return cls(
            version=int(record["version"]),
            merkle_root=bytes.fromhex(record["merkle_root"]),
            timestamp_tick=int(record["timestamp"]),
            nbits=int(record["nbits"]),
            nonce=int(record["nonce"]),
            parent_hash=bytes.fromhex(record["parent_hash"]),
            secret_digest=bytes.fromhex(record["secret_digest"]),
        )


def leading_zero_bits(digest: bytes) -> int:
    return len(digest) * 8 - int.from_bytes(digest, 'big').bit_length()


def meets_difficulty(header: BlockHeader) -> bool:
    return leading_zero_bits(header.hash()) >= header.nbits


@dataclass(frozen=True)
class Block:
    """Sealed block; timeout_validated is metadata and is not hashed"""

    header: BlockHeader
    transactions: Tuple[Transaction, ...]
    height: int
    timeout_validated: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'transactions', tuple(self.transactions))

    @property
    def hash(self) -> bytes:
        return self.header.hash()

    def hash_hex(self) -> str:
        return self.hash.hex()

    def to_record(self) -> Dict:
        return {
            "header": self.header.to_record(),
            "height": self.height,
            "timeout_validated": self.timeout_validated,
            "transactions": [tx.to_record() for tx in self.transactions],
        }

    @classmethod
    def from_record(cls, record: Dict) -> "Block":
        return cls(
            header=BlockHeader.from_record(record["header"]),
            transactions=tuple(Transaction.from_record(r) for r in record["transactions"]),
            height=int(record["height"]),
            timeout_validated=bool(record.get("timeout_validated", False)),
        )


@dataclass(frozen=True)
class ValidatedSecret:
    """
    Block secret after the verify-and-validate step

    Only the consortium's interval logic creates these: either from a
    Recovered session whose components matched the public recomputation,
    or from the timeout path (timeout_validated=True).
    """

    components: Tuple[int, ...]
    timeout_validated: bool = False

    def digest(self) -> bytes:
        return sha256(canonical_json(list(self.components)))


# =============================================================================
# Store
# =============================================================================

class ChainStore:
    """Blocks by hash with a children index; tip is the highest block, first seen wins ties"""

    def __init__(self):
        self.blocks: Dict[bytes, Block] = {}
        self.children: Dict[bytes, List[bytes]] = {GENESIS_HASH: []}
        self.order: List[bytes] = []
        self.tip: bytes = GENESIS_HASH

    def __len__(self):
        return len(self.blocks)

    def __contains__(self, block_hash: bytes) -> bool:
        return block_hash == GENESIS_HASH or block_hash in self.blocks

    def get(self, block_hash: bytes) -> Optional[Block]:
        return self.blocks.get(block_hash)

    def height_of(self, block_hash: bytes) -> int:
        if block_hash == GENESIS_HASH:
            return 0
        return self.blocks[block_hash].height

    @property
    def height(self) -> int:
        return self.height_of(self.tip)

    @property
    def tip_block(self) -> Optional[Block]:
        return self.blocks.get(self.tip)

    def insert(self, block: Block) -> bytes:
        """Store without any checks; returns the tip"""
        block_hash = block.hash
        if block_hash in self.blocks:
            return self.tip
        self.blocks[block_hash] = block
        self.order.append(block_hash)
        self.children.setdefault(block.header.parent_hash, []).append(block_hash)
        self.children.setdefault(block_hash, [])
        if block.height > self.height:
            self.tip = block_hash
        return self.tip

    def main_chain(self) -> List[Block]:
        """Blocks from height 1 up to the tip"""
        chain = []
        cursor = self.tip
        while cursor != GENESIS_HASH and cursor in self.blocks:
            block = self.blocks[cursor]
            chain.append(block)
            cursor = block.header.parent_hash
        return list(reversed(chain))


def check_block(store: ChainStore, block: Block):
    """Raise the first failing header invariant of block against its stored parent"""
    parent_hash = block.header.parent_hash
    if parent_hash not in store:
        raise OrphanParent(f"parent {parent_hash.hex()[:16]} is unknown")
    expected_height = store.height_of(parent_hash) + 1
    if block.height != expected_height:
        raise InvalidHeight(f"height {block.height}, parent implies {expected_height}")
    try:
        root = merkle_root(block.transactions)
    except EmptyBlock:
        raise MerkleMismatch("block carries no transactions")
    if root != block.header.merkle_root:
        raise MerkleMismatch(f"Merkle root mismatch at height {block.height}")
    if not meets_difficulty(block.header):
        raise InvalidPoW(f"header hash has fewer than {block.header.nbits} leading zero bits")


def append_block(store: ChainStore, block: Block) -> bytes:
    """
    Verify block and add it to the store

    Returns:
        The tip hash, advanced only if the block is strictly higher than the old tip;
        a block that is already stored leaves the store untouched
    """
    if store.get(block.hash) == block:
        logger.debug(f"Block {block.hash_hex()[:16]} already stored")
        return store.tip
    check_block(store, block)
    old_tip = store.tip
    tip = store.insert(block)
    if tip != old_tip:
        logger.info(f"⛓️  Block {block.hash_hex()[:16]} appended, tip at height {block.height}")
    else:
        logger.info(f"🔀 Block {block.hash_hex()[:16]} stored as fork at height {block.height}")
    return tip


def mine_block(parent: Optional[Block], transactions: Sequence[Transaction],
               validated_secret: ValidatedSecret, nbits: int = None, tick: int = 0,
               max_nonce: int = None) -> Block:
    """
    Assemble a header and search nonces from 0 until it meets nbits

    Args:
        parent: parent block, None for the genesis sentinel
        transactions: nonempty transaction list
        validated_secret: output of the verify-and-validate step
        nbits: required leading zero bits of the header hash
        tick: header timestamp
        max_nonce: search bound

    Returns:
        Sealed Block
    """
    if not isinstance(validated_secret, ValidatedSecret):
        raise UnvalidatedSecret("a block can only be mined over a validated block secret")
    if not transactions:
        raise EmptyBlock("cannot mine a block without transactions")
    if nbits is None:
        nbits = config.DEFAULT_NBITS
    if max_nonce is None:
        max_nonce = config.MAX_NONCE
    if nbits > 256:
        raise DifficultyTooHigh(f"nbits={nbits} exceeds the digest width")

    header = BlockHeader(
        version=config.BLOCK_VERSION,
        merkle_root=merkle_root(transactions),
        timestamp_tick=tick,
        nbits=nbits,
        nonce=0,
        parent_hash=parent.hash if parent is not None else GENESIS_HASH,
        secret_digest=validated_secret.digest(),
    )
    tail = header.merkle_root + header.parent_hash + header.secret_digest
    for nonce in range(max_nonce):
        digest = sha256(HEADER_STRUCT.pack(header.version, tick, nbits, nonce) + tail)
        if leading_zero_bits(digest) >= nbits:
            height = parent.height + 1 if parent is not None else 1
            logger.debug(f"Nonce {nonce} seals height {height} at nbits={nbits}")
            return Block(replace(header, nonce=nonce), tuple(transactions), height,
                         validated_secret.timeout_validated)
    raise DifficultyTooHigh(f"no nonce below {max_nonce} meets nbits={nbits}")


# =============================================================================
# Validation
# =============================================================================

@dataclass
class ValidationEntry:
    block_hash: str
    height: int
    status: str
    detail: str = ""
    timeout_validated: bool = False

    @property
    def valid(self) -> bool:
        return self.status == "valid"


@dataclass
class ValidationReport:
    entries: List[ValidationEntry] = dc_field(default_factory=list)

    @property
    def clean(self) -> bool:
        return all(e.valid for e in self.entries)

    @property
    def failures(self) -> List[ValidationEntry]:
        return [e for e in self.entries if not e.valid]

    def status_of(self, block_hash: str) -> str:
        for e in self.entries:
            if e.block_hash == block_hash:
                return e.status
        raise KeyError(block_hash)


def validate_chain(store: ChainStore) -> ValidationReport:
    """
    Walk genesis to tips breadth-first

    A failing block is reported with its own error; every descendant of a
    failing block is reported as InvalidAncestor; blocks not reachable from
    genesis are reported as OrphanParent.
    """
    report = ValidationReport()
    seen = set()
    queue = deque((child, False) for child in store.children.get(GENESIS_HASH, []))
    while queue:
        block_hash, ancestor_failed = queue.popleft()
        if block_hash in seen:
            continue
        seen.add(block_hash)
        block = store.blocks[block_hash]
        entry = ValidationEntry(block_hash.hex(), block.height, "valid",
                                timeout_validated=block.timeout_validated)
        if ancestor_failed:
            entry.status = "InvalidAncestor"
        else:
            try:
                check_block(store, block)
            except ChainError as e:
                entry.status = type(e).__name__
                entry.detail = str(e)
        report.entries.append(entry)
        for child in store.children.get(block_hash, []):
            queue.append((child, not entry.valid))

    for block_hash in store.order:
        if block_hash not in seen:
            block = store.blocks[block_hash]
            report.entries.append(ValidationEntry(
                block_hash.hex(), block.height, "OrphanParent",
                f"parent {block.header.parent_hash.hex()[:16]} is unknown",
                block.timeout_validated))

    if report.clean:
        logger.info(f"✅ Chain valid: {len(report.entries)} blocks, height {store.height}")
    else:
        logger.warning(f"❌ Chain invalid: {len(report.failures)} of {len(report.entries)} blocks fail")
    return report


# =============================================================================
# Persistence
# =============================================================================

def save_store(store: ChainStore, path: str):
    """One length-prefixed canonical JSON record per block, insertion order"""
    with open(path, 'wb') as f:
        for block_hash in store.order:
            record = canonical_json(store.blocks[block_hash].to_record())
            f.write(LENGTH_PREFIX.pack(len(record)))
            f.write(record)
    logger.info(f"💾 Saved {len(store)} blocks to {path}")


def iter_records(data: bytes) -> Iterable[Dict]:
    offset = 0
    while offset < len(data):
        if offset + LENGTH_PREFIX.size > len(data):
            raise CorruptStore(f"truncated length prefix at byte {offset}")
        (length,) = LENGTH_PREFIX.unpack_from(data, offset)
        offset += LENGTH_PREFIX.size
        if offset + length > len(data):
            raise CorruptStore(f"record at byte {offset} runs past end of file")
        try:
            yield json.loads(data[offset:offset + length].decode('utf-8'))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CorruptStore(f"record at byte {offset} is not valid JSON: {e}")
        offset += length


def load_store(path: str) -> ChainStore:
    """Rebuild a store without validating it; validate_chain reports any tampering"""
    if not os.path.exists(path):
        raise StoreNotFound(f"no chain store at {path}")
    with open(path, 'rb') as f:
        data = f.read()
    store = ChainStore()
    for record in iter_records(data):
        try:
            store.insert(Block.from_record(record))
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptStore(f"malformed block record: {e}")
    logger.debug(f"Loaded {len(store)} blocks from {path}")
    return store
