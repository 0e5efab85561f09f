"""Governance token: balances, delegation, and per-block vote checkpoints.

Balances are stored in 10^18 sub-units but every public amount is a whole
token count; nothing in the artifact ever mints or moves fractional tokens.
Voting power moves with delegation, not with balance: tokens held by an
account that never delegated carry no votes, and the contract's own
(unallocated) reserve never delegates.
"""

from __future__ import annotations

import bisect
import copy
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .canonical import enc_list, enc_str, enc_uint
from .errors import err

SUBUNITS = 10**18


class CheckpointSeries:
    """(block, value) history with at most one entry per block.

    A write at an existing block overwrites it; block numbers are kept
    strictly increasing so past lookups are a right-bisect away.
    """

    def __init__(self) -> None:
        self.blocks: List[int] = []
        self.values: List[int] = []

    def write(self, block: int, value: int) -> None:
        if self.blocks and block < self.blocks[-1]:
            raise ValueError("checkpoint blocks must not decrease")
        if self.blocks and self.blocks[-1] == block:
            self.values[-1] = value
        else:
            self.blocks.append(block)
            self.values.append(value)

    def latest(self) -> int:
        return self.values[-1] if self.values else 0

    def value_at(self, block: int) -> int:
        """Value as of the end of ``block``; 0 before the first write."""
        i = bisect.bisect_right(self.blocks, block)
        return self.values[i - 1] if i else 0

    def encode(self) -> bytes:
        return enc_list(
            enc_uint(b) + enc_uint(v) for b, v in zip(self.blocks, self.values)
        )


@dataclass
class TokenConfig:
    total_supply: int = 1_000_000  # whole tokens
    allocations: Dict[str, int] = field(default_factory=dict)  # address -> tokens
    auto_self_delegate: bool = True


class GovernanceToken:
    """Fungible voting token with checkpointed historical vote lookups."""

    def __init__(self, config: TokenConfig, contract_address: str):
        self.config = config
        self.contract_address = contract_address
        self.admin: Optional[str] = None  # set to the governor at genesis
        self.balances: Dict[str, int] = {}  # sub-units
        self.delegatee: Dict[str, str] = {}
        self.vote_checkpoints: Dict[str, CheckpointSeries] = {}
        allocated = sum(config.allocations.values())
        if allocated > config.total_supply:
            raise err("AllocationsExceedSupply",
                      f"allocated {allocated} of {config.total_supply}")

    # -- genesis ------------------------------------------------------

    def mint_initial(self, block: int) -> None:
        remainder = self.config.total_supply - sum(self.config.allocations.values())
        self.balances[self.contract_address] = remainder * SUBUNITS
        for holder, amount in self.config.allocations.items():
            self.balances[holder] = amount * SUBUNITS
            if self.config.auto_self_delegate:
                self._set_delegatee(holder, holder, block)

    # -- public amounts are whole tokens ------------------------------

    def balance_of(self, addr: str) -> int:
        return self.balances.get(addr, 0) // SUBUNITS

    def total_supply(self) -> int:
        return self.config.total_supply

    def past_total_supply(self, block: int, current_block: int) -> int:
        self._check_past(block, current_block)
        return self.config.total_supply

    def current_votes(self, addr: str) -> int:
        series = self.vote_checkpoints.get(addr)
        return (series.latest() if series else 0) // SUBUNITS

    def get_past_votes(self, addr: str, block: int, current_block: int) -> int:
        self._check_past(block, current_block)
        series = self.vote_checkpoints.get(addr)
        return (series.value_at(block) if series else 0) // SUBUNITS

    def delegatee_of(self, addr: str) -> Optional[str]:
        return self.delegatee.get(addr)

    # -- mutations (block number supplied by the ledger) ---------------

    def transfer(self, frm: str, to: str, amount: int, block: int) -> None:
        sub = amount * SUBUNITS
        if self.balances.get(frm, 0) < sub:
            raise err("InsufficientTokens",
                      f"{frm} holds {self.balance_of(frm)}, needs {amount}")
        self.balances[frm] = self.balances.get(frm, 0) - sub
        self.balances[to] = self.balances.get(to, 0) + sub
        self._move_votes(self.delegatee.get(frm), self.delegatee.get(to), sub, block)

    def grant_allocation(self, to: str, amount: int, block: int) -> None:
        """Transfer from the contract reserve, self-delegating new holders.

        Used for governance-approved member grants: an allocation is meant to
        confer voting power immediately, matching the genesis behavior.
        """
        self.transfer(self.contract_address, to, amount, block)
        if self.config.auto_self_delegate and to not in self.delegatee:
            self._set_delegatee(to, to, block)

    def delegate(self, delegator: str, delegatee: str, block: int) -> None:
        self._set_delegatee(delegator, delegatee, block)

    # -- internals ------------------------------------------------------

    def _set_delegatee(self, delegator: str, new: str, block: int) -> None:
        old = self.delegatee.get(delegator)
        if old == new:
            return
        self.delegatee[delegator] = new
        weight = self.balances.get(delegator, 0)
        self._move_votes(old, new, weight, block)

    def _move_votes(self, frm: Optional[str], to: Optional[str], sub: int, block: int) -> None:
        if sub == 0 or frm == to:
            return
        if frm is not None:
            series = self.vote_checkpoints.setdefault(frm, CheckpointSeries())
            series.write(block, series.latest() - sub)
        if to is not None:
            series = self.vote_checkpoints.setdefault(to, CheckpointSeries())
            series.write(block, series.latest() + sub)

    @staticmethod
    def _check_past(block: int, current_block: int) -> None:
        if block >= current_block:
            raise err("FutureBlock", f"block {block} not finalized (current {current_block})")

    # -- engine plumbing -------------------------------------------------

    def snapshot(self):
        return copy.deepcopy(
            (self.balances, self.delegatee, self.vote_checkpoints, self.admin)
        )

    def restore(self, snap) -> None:
        self.balances, self.delegatee, self.vote_checkpoints, self.admin = copy.deepcopy(snap)

    def digest_bytes(self) -> bytes:
        return (
            enc_str("token")
            + enc_list(
                enc_str(a) + enc_uint(v) for a, v in sorted(self.balances.items())
            )
            + enc_list(
                enc_str(a) + enc_str(d) for a, d in sorted(self.delegatee.items())
            )
            + enc_list(
                enc_str(a) + s.encode() for a, s in sorted(self.vote_checkpoints.items())
            )
        )
