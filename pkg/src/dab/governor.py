"""Proposal lifecycle with token-quorum voting and timelock execution.

The governor owns DAO membership, the proposal table, and treasury custody;
native value leaves the timelock account only while a queued proposal is
being executed. Voting weight is frozen at each proposal's snapshot block
via the token's checkpoint history, so post-snapshot transfers can never
change a recorded ballot.

Proposal actions are a closed, typed set: every governance effect the
artifact supports is enumerated here, which keeps execution total and lets
the state machine be tested exhaustively.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .canonical import enc_list, enc_str, enc_uint, sha256_hex
from .errors import err
from .registry import THRESHOLD_KEYS
from .token import CheckpointSeries, GovernanceToken

MAX_DESCRIPTION_BYTES = 4096

SUPPORTS = ("for", "against", "abstain")


# -- proposal actions ------------------------------------------------------

@dataclass(frozen=True)
class SendNative:
    to: str
    amount: int  # base units

    def encode(self) -> bytes:
        return enc_str("send_native") + enc_str(self.to) + enc_uint(self.amount)


@dataclass(frozen=True)
class TransferGovernanceTokens:
    to: str
    amount: int  # whole tokens

    def encode(self) -> bytes:
        return enc_str("transfer_governance_tokens") + enc_str(self.to) + enc_uint(self.amount)


@dataclass(frozen=True)
class AddMember:
    addr: str
    token_grant: int  # whole tokens

    def encode(self) -> bytes:
        return enc_str("add_member") + enc_str(self.addr) + enc_uint(self.token_grant)


@dataclass(frozen=True)
class RemoveMember:
    addr: str

    def encode(self) -> bytes:
        return enc_str("remove_member") + enc_str(self.addr)


@dataclass(frozen=True)
class SetThreshold:
    key: str
    value: int  # stored (scaled) integer

    def encode(self) -> bytes:
        return enc_str("set_threshold") + enc_str(self.key) + enc_uint(self.value)


Action = Union[SendNative, TransferGovernanceTokens, AddMember, RemoveMember, SetThreshold]


def proposal_id(actions: List[Action], description: str) -> str:
    body = enc_list(a.encode() for a in actions) + enc_str(sha256_hex(enc_str(description)))
    return sha256_hex(body)


def action_to_json(action: Action) -> dict:
    """Wire form of a proposal action; amounts are decimal strings."""
    if isinstance(action, SendNative):
        return {"type": "send_native", "to": action.to, "amount": str(action.amount)}
    if isinstance(action, TransferGovernanceTokens):
        return {"type": "transfer_tokens", "to": action.to, "amount": str(action.amount)}
    if isinstance(action, AddMember):
        return {"type": "add_member", "addr": action.addr,
                "grant": str(action.token_grant)}
    if isinstance(action, RemoveMember):
        return {"type": "remove_member", "addr": action.addr}
    if isinstance(action, SetThreshold):
        return {"type": "set_threshold", "key": action.key, "value": action.value}
    raise err("UnknownAction", repr(action))


def action_from_json(doc: dict, resolve, to_stored_value) -> Action:
    """Build an action from its wire form.

    ``resolve`` maps account names or hex strings to addresses;
    ``to_stored_value(key, physical)`` scales threshold values.
    ``amount_eth`` is accepted as a convenience for native amounts.
    """
    from decimal import Decimal

    kind = doc.get("type")
    if kind == "send_native":
        if "amount_eth" in doc:
            scaled = Decimal(str(doc["amount_eth"])) * 10**18
            if scaled != scaled.to_integral_value():
                raise err("BadAmount", "finer than one base unit")
            amount = int(scaled)
        else:
            amount = int(doc["amount"])
        return SendNative(resolve(doc["to"]), amount)
    if kind == "transfer_tokens":
        return TransferGovernanceTokens(resolve(doc["to"]), int(doc["amount"]))
    if kind == "add_member":
        return AddMember(resolve(doc["addr"]), int(doc.get("grant", 0)))
    if kind == "remove_member":
        return RemoveMember(resolve(doc["addr"]))
    if kind == "set_threshold":
        return SetThreshold(doc["key"], to_stored_value(doc["key"], doc["value"]))
    raise err("UnknownAction", f"unknown proposal action type {kind!r}")


@dataclass
class GovernorConfig:
    voting_delay: int = 1            # blocks between proposal and snapshot
    voting_period: int = 50          # blocks the vote stays open
    quorum_fraction: Fraction = Fraction(1, 2)
    quorum_basis: str = "circulating_member_supply"  # or "total_supply"
    timelock_min_delay: int = 120    # seconds between queue and execute
    proposal_threshold: int = 1      # whole tokens of current voting power

    def __post_init__(self):
        if self.voting_period < 1:
            raise err("BadGovernorConfig", "voting_period must be >= 1")
        if not 0 <= self.quorum_fraction <= 1:
            raise err("BadGovernorConfig", "quorum_fraction must be in [0, 1]")
        if self.quorum_basis not in ("circulating_member_supply", "total_supply"):
            raise err("BadGovernorConfig", f"unknown quorum basis {self.quorum_basis!r}")


@dataclass
class Proposal:
    id: str
    proposer: str
    actions: List[Action]
    description: str
    snapshot_block: int
    vote_start_block: int
    vote_end_block: int
    tally_for: int = 0
    tally_against: int = 0
    tally_abstain: int = 0
    eta: Optional[int] = None
    executed: bool = False
    ballots: Dict[str, Tuple[str, int]] = field(default_factory=dict)  # voter -> (support, weight)


LIVE_STATES = ("Pending", "Active", "Succeeded", "Queued")


class Governor:
    def __init__(self, config: GovernorConfig, governor_address: str,
                 timelock_address: str, token: GovernanceToken):
        self.config = config
        self.governor_address = governor_address
        self.timelock_address = timelock_address
        self.token = token
        self.members: List[str] = []
        self.member_supply = CheckpointSeries()  # whole tokens held by members
        self.proposals: Dict[str, Proposal] = {}
        self.execution_log: List[Tuple[int, str]] = []  # (block, proposal id)

    # -- membership ---------------------------------------------------------

    def is_member(self, addr: str) -> bool:
        return addr in self.members

    def member_count(self) -> int:
        return len(self.members)

    def refresh_member_supply(self, block: int) -> None:
        total = sum(self.token.balance_of(m) for m in self.members)
        if total != self.member_supply.latest() or not self.member_supply.blocks:
            self.member_supply.write(block, total)

    # -- lifecycle ------------------------------------------------------------

    def propose(self, proposer: str, actions: List[Action], description: str,
                block: int) -> str:
        if not actions:
            raise err("EmptyActions", "a proposal needs at least one action")
        if len(description.encode("utf-8")) > MAX_DESCRIPTION_BYTES:
            raise err("DescriptionTooLong", "descriptions are capped at 4 KiB")
        if self.token.current_votes(proposer) < self.config.proposal_threshold:
            raise err("BelowProposalThreshold",
                      f"needs {self.config.proposal_threshold} votes to propose")
        for action in actions:
            self._validate_action(action)
        pid = proposal_id(actions, description)
        existing = self.proposals.get(pid)
        if existing is not None and self._state_of(existing, block) in LIVE_STATES:
            raise err("DuplicateProposal", "identical proposal is still live")
        snapshot = block + self.config.voting_delay
        self.proposals[pid] = Proposal(
            id=pid,
            proposer=proposer,
            actions=list(actions),
            description=description,
            snapshot_block=snapshot,
            vote_start_block=snapshot,
            vote_end_block=snapshot + self.config.voting_period,
        )
        return pid

    def cast_vote(self, voter: str, pid: str, support: str, block: int) -> int:
        if support not in SUPPORTS:
            raise err("BadSupport", f"support must be one of {SUPPORTS}")
        proposal = self._get(pid)
        if self._state_of(proposal, block) != "Active":
            raise err("NotActive", "voting window is not open")
        if voter in proposal.ballots:
            raise err("AlreadyVoted", "one ballot per voter per proposal")
        weight = self.token.get_past_votes(voter, proposal.snapshot_block, block)
        if weight == 0:
            raise err("ZeroWeight", "no voting power at the snapshot block")
        proposal.ballots[voter] = (support, weight)
        if support == "for":
            proposal.tally_for += weight
        elif support == "against":
            proposal.tally_against += weight
        else:
            proposal.tally_abstain += weight
        return weight

    def state(self, pid: str, current_block: int) -> str:
        return self._state_of(self._get(pid), current_block)

    def queue(self, pid: str, current_block: int, current_time: int) -> int:
        proposal = self._get(pid)
        if self._state_of(proposal, current_block) != "Succeeded":
            raise err("NotSucceeded", "only succeeded proposals can be queued")
        proposal.eta = current_time + self.config.timelock_min_delay
        return proposal.eta

    def execute(self, pid: str, current_block: int, current_time: int,
                executor: "ActionExecutor") -> None:
        proposal = self._get(pid)
        if self._state_of(proposal, current_block) != "Queued":
            raise err("NotQueued", "proposal is not queued")
        if current_time < proposal.eta:
            raise err("TimelockNotElapsed",
                      f"eta {proposal.eta}, now {current_time}")
        for action in proposal.actions:
            self._apply(action, executor, current_block)
        proposal.executed = True
        self.execution_log.append((current_block, pid))

    def quorum_at_snapshot(self, proposal: Proposal) -> Tuple[int, Fraction]:
        if self.config.quorum_basis == "total_supply":
            basis = self.token.total_supply()
        else:
            basis = self.member_supply.value_at(proposal.snapshot_block)
        return basis, self.config.quorum_fraction

    # -- internals --------------------------------------------------------------

    def _get(self, pid: str) -> Proposal:
        proposal = self.proposals.get(pid)
        if proposal is None:
            raise err("UnknownProposal", pid)
        return proposal

    def _state_of(self, proposal: Proposal, current_block: int) -> str:
        if proposal.executed:
            return "Executed"
        if proposal.eta is not None:
            return "Queued"
        if current_block <= proposal.snapshot_block:
            return "Pending"
        if current_block <= proposal.vote_end_block:
            return "Active"
        basis, fraction = self.quorum_at_snapshot(proposal)
        participating = proposal.tally_for + proposal.tally_abstain
        quorum_met = participating * fraction.denominator >= basis * fraction.numerator
        if quorum_met and proposal.tally_for > proposal.tally_against:
            return "Succeeded"
        return "Defeated"

    def _validate_action(self, action: Action) -> None:
        if isinstance(action, SetThreshold) and action.key not in THRESHOLD_KEYS:
            raise err("UnknownKey", action.key)
        if isinstance(action, (SendNative, TransferGovernanceTokens)) and action.amount <= 0:
            raise err("BadAmount", "governance transfers must be positive")

    def _apply(self, action: Action, executor: "ActionExecutor", block: int) -> None:
        if isinstance(action, SendNative):
            executor.send_native(action.to, action.amount)
        elif isinstance(action, TransferGovernanceTokens):
            executor.send_tokens(action.to, action.amount)
        elif isinstance(action, AddMember):
            if action.addr in self.members:
                raise err("AlreadyMember", action.addr)
            if action.token_grant:
                executor.grant_tokens(action.addr, action.token_grant)
            self.members.append(action.addr)
        elif isinstance(action, RemoveMember):
            if action.addr not in self.members:
                raise err("NotMember", action.addr)
            self.members.remove(action.addr)  # tokens stay with the holder
        elif isinstance(action, SetThreshold):
            executor.set_threshold(action.key, action.value)
        else:  # pragma: no cover - closed union
            raise err("UnknownAction", repr(action))

    # -- engine plumbing -----------------------------------------------------------

    def snapshot(self):
        return copy.deepcopy(
            (self.members, self.member_supply, self.proposals, self.execution_log)
        )

    def restore(self, snap) -> None:
        (self.members, self.member_supply,
         self.proposals, self.execution_log) = copy.deepcopy(snap)

    def digest_bytes(self) -> bytes:
        return (
            enc_str("governor")
            + enc_list(enc_str(m) for m in self.members)
            + self.member_supply.encode()
            + enc_list(self._encode_proposal(p) for _, p in sorted(self.proposals.items()))
        )

    @staticmethod
    def _encode_proposal(p: Proposal) -> bytes:
        return (
            enc_str(p.id)
            + enc_str(p.proposer)
            + enc_uint(p.snapshot_block)
            + enc_uint(p.vote_end_block)
            + enc_uint(p.tally_for)
            + enc_uint(p.tally_against)
            + enc_uint(p.tally_abstain)
            + enc_uint(p.eta or 0)
            + enc_uint(1 if p.executed else 0)
            + enc_list(
                enc_str(v) + enc_str(s) + enc_uint(w)
                for v, (s, w) in sorted(p.ballots.items())
            )
        )


class ActionExecutor:
    """Effect primitives handed to the governor during proposal execution.

    Constructed by the engine inside ``execute`` only; nothing else can reach
    the treasury, the token reserve, or the threshold registry.
    """

    def send_native(self, to: str, amount: int) -> None:
        raise NotImplementedError

    def send_tokens(self, to: str, amount: int) -> None:
        raise NotImplementedError

    def grant_tokens(self, to: str, amount: int) -> None:
        raise NotImplementedError

    def set_threshold(self, key: str, stored_value: int) -> None:
        raise NotImplementedError
