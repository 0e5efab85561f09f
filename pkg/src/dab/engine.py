"""Engine facade: genesis wiring, transaction dispatch, and event emission.

Everything that can mutate chain or contract state funnels through
``submit_tx`` here (single-writer); reads are snapshot-safe. A transaction
always produces exactly one new block carrying its receipt, and the gas fee
moves to the fee sink whether the action applied or reverted. Reverts roll
back every contract and balance change except the fee itself.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import ClassVar, Dict, List, Optional, Tuple, Union

from . import governor as gov
from .building import BuildingSim, SimConfig
from .canonical import enc_list, enc_str, enc_uint, sha256_hex
from .errors import EngineError, err
from .events import EventBus
from .ledger import (DEFAULT_GAS_PRICE, DEFAULT_GAS_SCHEDULE, ChainState,
                     Receipt, address, dev_address, dev_auth_secret)
from .registry import DEFAULT_THRESHOLDS, AutomationRegistry
from .reservation import ReservationBook, ReservationConfig
from .token import GovernanceToken, TokenConfig


# -- transaction payloads ----------------------------------------------------

@dataclass(frozen=True)
class TransferNative:
    to: str
    amount: int
    kind: ClassVar[str] = "transfer_native"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.to) + enc_uint(self.amount)


@dataclass(frozen=True)
class TransferTokens:
    to: str
    amount: int
    kind: ClassVar[str] = "transfer_tokens"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.to) + enc_uint(self.amount)


@dataclass(frozen=True)
class Delegate:
    delegatee: str
    kind: ClassVar[str] = "delegate"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.delegatee)


@dataclass(frozen=True)
class Propose:
    actions: Tuple[gov.Action, ...]
    description: str
    kind: ClassVar[str] = "propose"

    def encode(self) -> bytes:
        return (enc_str(self.kind)
                + enc_list(a.encode() for a in self.actions)
                + enc_str(self.description))


@dataclass(frozen=True)
class Vote:
    proposal_id: str
    support: str
    kind: ClassVar[str] = "vote"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.proposal_id) + enc_str(self.support)


@dataclass(frozen=True)
class Queue:
    proposal_id: str
    kind: ClassVar[str] = "queue"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.proposal_id)


@dataclass(frozen=True)
class Execute:
    proposal_id: str
    kind: ClassVar[str] = "execute"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_str(self.proposal_id)


@dataclass(frozen=True)
class BookRoom:
    room: str
    slot: str
    attached_value: int
    kind: ClassVar[str] = "book_room"

    def encode(self) -> bytes:
        return (enc_str(self.kind) + enc_str(self.room) + enc_str(self.slot)
                + enc_uint(self.attached_value))


@dataclass(frozen=True)
class CancelBooking:
    booking_id: int
    kind: ClassVar[str] = "cancel_booking"

    def encode(self) -> bytes:
        return enc_str(self.kind) + enc_uint(self.booking_id)


TxAction = Union[TransferNative, TransferTokens, Delegate, Propose, Vote,
                 Queue, Execute, BookRoom, CancelBooking]


@dataclass(frozen=True)
class Transaction:
    sender: str
    action: TxAction
    gas_price: int
    auth: str


@dataclass(frozen=True)
class TxResult:
    receipt: Receipt
    value: Optional[object] = None  # e.g. proposal id, booking id


# -- genesis configuration -----------------------------------------------------

@dataclass
class AccountSpec:
    name: str
    funding: int                 # base units
    tokens: int = 0              # whole-token genesis allocation
    member: bool = False
    address: str = ""
    auth_secret: str = ""

    def __post_init__(self):
        if not self.address:
            self.address = dev_address(self.name)
        self.address = address(self.address)
        if not self.auth_secret:
            self.auth_secret = dev_auth_secret(self.address)


def default_accounts() -> List[AccountSpec]:
    eth = 10**18
    return [
        AccountSpec("manager1", eth, tokens=10_000, member=True),
        AccountSpec("manager2", eth, tokens=10_000, member=True),
        AccountSpec("manager3", eth, tokens=10_000, member=True),
        AccountSpec("manager4", eth),
        AccountSpec("occupant", eth),
    ]


@dataclass
class GenesisConfig:
    accounts: List[AccountSpec] = field(default_factory=default_accounts)
    gas_schedule: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_GAS_SCHEDULE))
    default_gas_price: int = DEFAULT_GAS_PRICE
    seconds_per_block: int = 12
    governor: gov.GovernorConfig = field(default_factory=gov.GovernorConfig)
    token_supply: int = 1_000_000
    auto_self_delegate: bool = True
    reservation: ReservationConfig = field(default_factory=ReservationConfig)
    thresholds: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))


CONTRACT_NAMES = ("token", "governor", "timelock", "reservation", "registry")


class _Executor(gov.ActionExecutor):
    """Treasury and registry primitives, alive only inside execute()."""

    def __init__(self, engine: "Engine", block: int):
        self.engine = engine
        self.block = block

    def send_native(self, to: str, amount: int) -> None:
        chain = self.engine.chain
        treasury = self.engine.treasury_address
        if chain.balance_of(treasury) < amount:
            raise err("InsufficientTreasury",
                      f"treasury holds {chain.balance_of(treasury)}")
        chain.move(treasury, to, amount, what="treasury send")

    def send_tokens(self, to: str, amount: int) -> None:
        token = self.engine.token
        token.transfer(token.contract_address, to, amount, self.block)

    def grant_tokens(self, to: str, amount: int) -> None:
        self.engine.token.grant_allocation(to, amount, self.block)

    def set_threshold(self, key: str, stored_value: int) -> None:
        self.engine.registry.set_threshold(
            self.engine.governor_address, key, stored_value, self.block)


class Engine:
    def __init__(self, config: GenesisConfig, sim_config: SimConfig = None,
                 seed: int = 0):
        self._validate_genesis(config)
        self.config = config
        self.bus = EventBus()
        # the serialized command stream: every writer (API handler, agent
        # loop, scenario runner thread) must hold this around mutations
        self.write_lock = threading.RLock()

        self.fee_sink = dev_address("fee-sink")
        addresses = {name: dev_address(name + "-contract") for name in CONTRACT_NAMES}
        self.governor_address = addresses["governor"]
        self.treasury_address = addresses["timelock"]

        self.chain = ChainState(self.fee_sink, config.gas_schedule,
                                config.seconds_per_block)
        self.chain.contracts = addresses

        # All five contracts come up in one atomic step; the governor holds
        # the admin rights from the first block.
        allocations = {a.address: a.tokens for a in config.accounts if a.tokens}
        self.token = GovernanceToken(
            TokenConfig(config.token_supply, allocations, config.auto_self_delegate),
            addresses["token"])
        self.token.admin = self.governor_address
        self.governor = gov.Governor(config.governor, self.governor_address,
                                     self.treasury_address, self.token)
        self.registry = AutomationRegistry(addresses["registry"],
                                           self.governor_address,
                                           config.thresholds)
        reservation_cfg = replace(config.reservation,
                                  payment_address=self.treasury_address)
        self.reservation = ReservationBook(reservation_cfg, addresses["reservation"])

        self.accounts: Dict[str, AccountSpec] = {a.name: a for a in config.accounts}
        for spec in config.accounts:
            self.chain.credit(spec.address, spec.funding)
            self.chain.auth_secrets[spec.address] = spec.auth_secret
        self.token.mint_initial(block=0)
        self.governor.members = [a.address for a in config.accounts if a.member]
        self.governor.refresh_member_supply(block=0)

        self.sim = BuildingSim(sim_config or SimConfig(), seed)
        self.bus.emit("block", {"number": 0, "timestamp": 0})

    @staticmethod
    def _validate_genesis(config: GenesisConfig) -> None:
        addrs = [a.address for a in config.accounts]
        if not addrs or len(set(addrs)) != len(addrs):
            raise err("DuplicateOrEmptyAccounts",
                      "genesis needs a non-empty set of distinct accounts")
        if sum(a.funding for a in config.accounts) <= 0:
            raise err("ZeroTotalFunding", "genesis must fund at least one account")

    # -- account helpers ----------------------------------------------------

    def address_of(self, name_or_address: str) -> str:
        if name_or_address in self.accounts:
            return self.accounts[name_or_address].address
        return address(name_or_address)

    def auth_secret_for(self, addr: str) -> str:
        secret = self.chain.auth_secrets.get(address(addr))
        if secret is None:
            raise err("Unauthorized", f"no dev-mode key for {addr}")
        return secret

    # -- core ledger operations ------------------------------------------------

    def submit_tx(self, tx: Transaction) -> TxResult:
        sender = address(tx.sender)
        if tx.gas_price <= 0:
            raise err("BadGasPrice", "gas price must be positive")
        if self.chain.auth_secrets.get(sender) != tx.auth:
            raise err("Unauthorized", "auth token does not match sender")
        gas = self.chain.gas_for(tx.action.kind)
        fee = gas * tx.gas_price
        attached = self._attached_value(tx.action)
        if self.chain.balance_of(sender) < fee + attached:
            raise err("InsufficientBalance",
                      f"{sender} cannot cover fee {fee} + value {attached}")

        block = self.chain.begin_block()
        snapshot = self._business_snapshot()
        status, reason, value, deferred_events = "success", None, None, []
        try:
            value, deferred_events = self._apply(sender, tx.action, block)
            self.governor.refresh_member_supply(block.number)
        except EngineError as e:
            self._business_restore(snapshot)
            status, reason = "reverted", e.code

        self.chain.move(sender, self.fee_sink, fee, what="gas fee")
        tx_id = sha256_hex(enc_str(sender) + tx.action.encode()
                           + enc_uint(tx.gas_price) + enc_uint(block.number))
        receipt = Receipt(tx_id, block.number, status, reason, gas, fee)
        block.receipts.append(receipt)
        self.bus.emit("block", {"number": block.number,
                                "timestamp": block.timestamp,
                                "tx_id": tx_id, "status": status})
        for kind, payload in deferred_events:
            self.bus.emit(kind, payload)
        return TxResult(receipt, value)

    def submit(self, sender: str, action: TxAction,
               gas_price: int = None) -> TxResult:
        """Dev-mode convenience: sign with the sender's ambient secret."""
        addr = self.address_of(sender)
        return self.submit_tx(Transaction(
            addr, action, gas_price or self.config.default_gas_price,
            self.auth_secret_for(addr)))

    def advance_block(self, n: int, dt: int = None) -> int:
        number = self.chain.advance_blocks(n, self.config.seconds_per_block
                                           if dt is None else dt)
        for blk in self.chain.blocks[-n:]:
            self.bus.emit("block", {"number": blk.number, "timestamp": blk.timestamp})
        return number

    def balance_of(self, addr: str) -> int:
        return self.chain.balance_of(self.address_of(addr))

    def chain_digest(self) -> str:
        return self.chain.chain_digest()

    def state_digest(self, exclude_balances: Tuple[str, ...] = ()) -> str:
        """Digest of contract + balance state, ignoring block history.

        Used to verify that rejected and reverted operations leave every
        non-fee byte untouched: pass the fee payer and fee sink here.
        """
        return sha256_hex(
            self.chain.balances_bytes(exclude_balances)
            + self.token.digest_bytes()
            + self.governor.digest_bytes()
            + self.registry.digest_bytes()
            + self.reservation.digest_bytes()
        )

    # -- sim driving -------------------------------------------------------------

    def tick_sim(self, dt: int) -> None:
        env = self.sim.tick(dt)
        self.bus.emit("env_tick", {
            "temperature": env.temperature, "humidity": env.humidity,
            "luminance": env.luminance, "co": env.co,
            "occupancy": env.occupancy, "sim_time": env.sim_time,
            "energy_kwh": str(self.sim.read_energy_kwh()),
        })

    # -- internals ---------------------------------------------------------------

    @staticmethod
    def _attached_value(action: TxAction) -> int:
        if isinstance(action, TransferNative):
            return action.amount
        if isinstance(action, BookRoom):
            return action.attached_value
        return 0

    def _business_snapshot(self):
        return (dict(self.chain.balances), self.token.snapshot(),
                self.governor.snapshot(), self.registry.snapshot(),
                self.reservation.snapshot())

    def _business_restore(self, snap) -> None:
        balances, token_snap, governor_snap, registry_snap, reservation_snap = snap
        self.chain.balances = dict(balances)
        self.token.restore(token_snap)
        self.governor.restore(governor_snap)
        self.registry.restore(registry_snap)
        self.reservation.restore(reservation_snap)

    def _apply(self, sender: str, action: TxAction, block) -> Tuple[object, list]:
        number, now = block.number, block.timestamp
        if isinstance(action, TransferNative):
            self.chain.move(sender, address(action.to), action.amount)
            return None, []
        if isinstance(action, TransferTokens):
            self.token.transfer(sender, address(action.to), action.amount, number)
            return None, []
        if isinstance(action, Delegate):
            self.token.delegate(sender, address(action.delegatee), number)
            return None, []
        if isinstance(action, Propose):
            pid = self.governor.propose(sender, list(action.actions),
                                        action.description, number)
            return pid, [("proposal_state", {"proposal_id": pid, "state": "Pending"})]
        if isinstance(action, Vote):
            weight = self.governor.cast_vote(sender, action.proposal_id,
                                             action.support, number)
            proposal = self.governor.proposals[action.proposal_id]
            return weight, [("proposal_state", {
                "proposal_id": action.proposal_id, "state": "Active",
                "tally_for": proposal.tally_for,
                "tally_against": proposal.tally_against,
                "tally_abstain": proposal.tally_abstain,
            })]
        if isinstance(action, Queue):
            eta = self.governor.queue(action.proposal_id, number, now)
            return eta, [("proposal_state", {"proposal_id": action.proposal_id,
                                             "state": "Queued", "eta": eta})]
        if isinstance(action, Execute):
            self.governor.execute(action.proposal_id, number, now,
                                  _Executor(self, number))
            return None, [("proposal_state", {"proposal_id": action.proposal_id,
                                              "state": "Executed"})]
        if isinstance(action, BookRoom):
            booking = self.reservation.book(sender, action.room, action.slot,
                                            action.attached_value)
            self.chain.move(sender, self.treasury_address, action.attached_value,
                            what="booking fee")
            return booking.booking_id, [("booking", {
                "booking_id": booking.booking_id, "user": sender,
                "room": booking.room, "slot": booking.slot, "status": "occupied",
            })]
        if isinstance(action, CancelBooking):
            booking = self.reservation.cancel(sender, action.booking_id)
            if self.reservation.config.refund_on_cancel:
                self.chain.move(self.treasury_address, sender,
                                self.reservation.config.booking_fee,
                                what="booking refund")
            return None, [("booking", {
                "booking_id": booking.booking_id, "user": sender,
                "room": booking.room, "slot": booking.slot, "status": "free",
            })]
        raise err("UnknownAction", repr(action))
