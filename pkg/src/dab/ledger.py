"""Single-node block ledger: accounts, balances, gas fees, chain digests.

One block per submitted transaction, plus explicit empty-block advancement
for the governance clock. Fees move to a fee-sink account instead of being
burned so the native-supply conservation invariant is directly testable.
All amounts are integer base units (10^18 = one ETH-equivalent); nothing on
the ledger ever touches floating point.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, TextIO, Union

from .canonical import enc_list, enc_str, enc_uint, sha256_hex
from .errors import err

ETH = 10**18
GWEI = 10**9

_ADDRESS_RE = re.compile(r"^0x[0-9a-fA-F]{40}$")


def address(value: str) -> str:
    """Canonicalize an address to 0x + 40 lowercase hex digits."""
    if not _ADDRESS_RE.match(value):
        raise err("BadAddress", f"not a 20-byte hex address: {value!r}")
    return value.lower()


def dev_address(name: str) -> str:
    """Deterministic address for a named dev-mode account or contract."""
    return "0x" + sha256_hex(enc_str("dab:" + name))[2:42]


def dev_auth_secret(addr: str) -> str:
    return "dev:" + addr


# Gas units per submitted operation kind. Measured testnet values where the
# operation appeared in the deployed prototype; delegate and cancel_booking
# are simulator-only kinds with invented defaults.
DEFAULT_GAS_SCHEDULE: Dict[str, int] = {
    "transfer_native": 21_055,
    "transfer_tokens": 72_954,
    "delegate": 95_000,
    "propose": 108_168,
    "vote": 93_186,
    "queue": 123_769,
    "execute": 132_563,
    "book_room": 181_123,
    "cancel_booking": 52_000,
    "add_member": 73_610,
}

DEFAULT_GAS_PRICE = GWEI  # 1 gwei


@dataclass(frozen=True)
class Receipt:
    tx_id: str
    block_number: int
    status: str  # "success" | "reverted"
    revert_reason: Optional[str]
    gas_used: int
    fee: int  # base units, = gas_used * gas_price exactly

    def encode(self) -> bytes:
        return (
            enc_str(self.tx_id)
            + enc_uint(self.block_number)
            + enc_str(self.status)
            + enc_str(self.revert_reason or "")
            + enc_uint(self.gas_used)
            + enc_uint(self.fee)
        )

    def to_json(self) -> dict:
        status: Union[str, dict] = self.status
        if self.status == "reverted":
            status = {"reverted": self.revert_reason or ""}
        return {
            "tx_id": self.tx_id,
            "block_number": self.block_number,
            "status": status,
            "gas_used": self.gas_used,
            "fee": str(self.fee),
        }

    @staticmethod
    def from_json(doc: dict) -> "Receipt":
        status = doc["status"]
        if isinstance(status, dict):
            return Receipt(doc["tx_id"], doc["block_number"], "reverted",
                           status["reverted"], doc["gas_used"], int(doc["fee"]))
        return Receipt(doc["tx_id"], doc["block_number"], "success", None,
                       doc["gas_used"], int(doc["fee"]))


@dataclass
class Block:
    number: int
    timestamp: int  # logical seconds
    parent_digest: str
    receipts: List[Receipt] = field(default_factory=list)

    def encode(self) -> bytes:
        return (
            enc_uint(self.number)
            + enc_uint(self.timestamp)
            + enc_str(self.parent_digest)
            + enc_list(r.encode() for r in self.receipts)
        )

    def digest(self) -> str:
        return sha256_hex(self.encode())

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "timestamp": self.timestamp,
            "parent_digest": self.parent_digest,
            "receipts": [r.to_json() for r in self.receipts],
        }

    @staticmethod
    def from_json(doc: dict) -> "Block":
        return Block(doc["number"], doc["timestamp"], doc["parent_digest"],
                     [Receipt.from_json(r) for r in doc["receipts"]])


class ChainState:
    """Blocks plus the native balance table.

    Mutations happen only through the engine's serialized command stream;
    everything here is synchronous bookkeeping.
    """

    def __init__(self, fee_sink: str, gas_schedule: Dict[str, int],
                 seconds_per_block: int = 12):
        for kind, units in gas_schedule.items():
            if units <= 0:
                raise err("BadGasSchedule", f"gas for {kind} must be positive")
        self.fee_sink = address(fee_sink)
        self.gas_schedule = dict(gas_schedule)
        self.seconds_per_block = seconds_per_block
        self.balances: Dict[str, int] = {}
        self.blocks: List[Block] = [Block(0, 0, "0x" + "00" * 32)]
        self.contracts: Dict[str, str] = {}  # role name -> address
        self.auth_secrets: Dict[str, str] = {}

    # -- clock ----------------------------------------------------------

    @property
    def current_block(self) -> int:
        return self.blocks[-1].number

    @property
    def timestamp(self) -> int:
        return self.blocks[-1].timestamp

    def begin_block(self) -> Block:
        """Open the block for the next transaction."""
        prev = self.blocks[-1]
        block = Block(prev.number + 1, prev.timestamp + self.seconds_per_block,
                      prev.digest())
        self.blocks.append(block)
        return block

    def advance_blocks(self, n: int, dt: int) -> int:
        if n < 1:
            raise err("BadBlockCount", "must advance at least one block")
        for _ in range(n):
            prev = self.blocks[-1]
            self.blocks.append(Block(prev.number + 1, prev.timestamp + dt,
                                     prev.digest()))
        return self.current_block

    # -- balances ---------------------------------------------------------

    def balance_of(self, addr: str) -> int:
        return self.balances.get(address(addr), 0)

    def credit(self, addr: str, amount: int) -> None:
        self.balances[address(addr)] = self.balance_of(addr) + amount

    def move(self, frm: str, to: str, amount: int, what: str = "value") -> None:
        if amount < 0:
            raise err("BadAmount", "negative transfer")
        if self.balance_of(frm) < amount:
            raise err("InsufficientBalance", f"{frm} cannot cover {what}")
        self.balances[address(frm)] = self.balance_of(frm) - amount
        self.credit(to, amount)

    def gas_for(self, kind: str) -> int:
        if kind not in self.gas_schedule:
            raise err("UnknownAction", f"no gas entry for {kind!r}")
        return self.gas_schedule[kind]

    # -- digests ----------------------------------------------------------

    def balances_bytes(self, exclude: Iterable[str] = ()) -> bytes:
        skip = {address(a) for a in exclude}
        return enc_list(
            enc_str(a) + enc_uint(v)
            for a, v in sorted(self.balances.items())
            if a not in skip
        )

    def chain_digest(self) -> str:
        body = enc_list(b.encode() for b in self.blocks) + self.balances_bytes()
        return sha256_hex(body)

    # -- JSONL export / import ---------------------------------------------

    def export_jsonl(self, fp: TextIO) -> None:
        for block in self.blocks:
            fp.write(json.dumps(block.to_json(), separators=(",", ":")) + "\n")

    @staticmethod
    def import_jsonl(fp: TextIO) -> List[Block]:
        return [Block.from_json(json.loads(line)) for line in fp if line.strip()]
