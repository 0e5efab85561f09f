from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from dab.errors import EngineError
from dab.token import CheckpointSeries, GovernanceToken, TokenConfig

CONTRACT = "0x" + "c0" * 20
HOLDERS = ["0x" + f"{i:02x}" * 20 for i in range(1, 9)]


def make_token(allocations=None, auto=True) -> GovernanceToken:
    allocations = allocations if allocations is not None else {
        HOLDERS[0]: 10_000, HOLDERS[1]: 10_000, HOLDERS[2]: 10_000}
    token = GovernanceToken(TokenConfig(1_000_000, allocations, auto), CONTRACT)
    token.mint_initial(block=0)
    return token


# -- replay oracle: re-derive balances and votes from the raw event log ------

class ReplayOracle:
    """Brute-force ground truth, independent of the checkpoint machinery.

    Replays the (block, event) log from genesis up to a target block and
    reads off balances and delegated vote totals directly.
    """

    def __init__(self, allocations, auto_self_delegate=True):
        self.events = []
        for holder, amount in allocations.items():
            self.events.append((0, "mint", holder, amount))
            if auto_self_delegate:
                self.events.append((0, "delegate", holder, holder))

    def record_transfer(self, block, frm, to, amount):
        self.events.append((block, "transfer", frm, to, amount))

    def record_delegate(self, block, delegator, delegatee):
        self.events.append((block, "delegate", delegator, delegatee))

    def votes_at(self, addr, block) -> int:
        balances, delegatee = {}, {}
        for event in self.events:
            if event[0] > block:
                continue
            if event[1] == "mint":
                balances[event[2]] = balances.get(event[2], 0) + event[3]
            elif event[1] == "transfer":
                _, _, frm, to, amount = event
                balances[frm] = balances.get(frm, 0) - amount
                balances[to] = balances.get(to, 0) + amount
            elif event[1] == "delegate":
                delegatee[event[2]] = event[3]
        return sum(balance for holder, balance in balances.items()
                   if delegatee.get(holder) == addr)


def test_mint_allocations_and_reserve():
    token = make_token()
    assert token.balance_of(HOLDERS[0]) == 10_000
    assert token.balance_of(CONTRACT) == 970_000
    assert token.total_supply() == 1_000_000


def test_allocations_exceeding_supply_rejected():
    with pytest.raises(EngineError) as e:
        GovernanceToken(TokenConfig(1_000_000, {HOLDERS[0]: 1_000_001}), CONTRACT)
    assert e.value.code == "AllocationsExceedSupply"


def test_auto_self_delegation_counts_votes_at_block_zero():
    token = make_token()
    assert token.get_past_votes(HOLDERS[0], 0, current_block=1) == 10_000
    assert token.current_votes(CONTRACT) == 0  # reserve never delegates


def test_transfer_moves_balances_and_tallies():
    token = make_token()
    token.transfer(HOLDERS[0], HOLDERS[1], 2_000, block=1)
    assert token.balance_of(HOLDERS[0]) == 8_000
    assert token.balance_of(HOLDERS[1]) == 12_000
    assert token.current_votes(HOLDERS[0]) == 8_000
    assert token.current_votes(HOLDERS[1]) == 12_000


def test_zero_transfer_is_noop_success():
    token = make_token()
    before = dict(token.balances)
    token.transfer(HOLDERS[0], HOLDERS[1], 0, block=1)
    assert token.balances == before
    assert token.current_votes(HOLDERS[0]) == 10_000


def test_transfer_exceeding_balance_rejected():
    token = make_token()
    with pytest.raises(EngineError) as e:
        token.transfer(HOLDERS[0], HOLDERS[1], 10_001, block=1)
    assert e.value.code == "InsufficientTokens"


def test_delegation_moves_full_weight():
    token = make_token()
    token.delegate(HOLDERS[0], HOLDERS[1], block=1)
    assert token.current_votes(HOLDERS[1]) == 20_000
    assert token.current_votes(HOLDERS[0]) == 0


def test_self_delegation_is_idempotent():
    token = make_token()
    checkpoints = token.vote_checkpoints[HOLDERS[0]]
    writes = len(checkpoints.blocks)
    token.delegate(HOLDERS[0], HOLDERS[0], block=5)
    assert len(checkpoints.blocks) == writes
    assert token.current_votes(HOLDERS[0]) == 10_000


def test_delegate_then_transfer_tracks_new_balance():
    token = make_token()
    token.delegate(HOLDERS[0], HOLDERS[1], block=1)
    token.transfer(HOLDERS[0], HOLDERS[2], 4_000, block=2)
    # delegated weight follows the delegator's live balance
    assert token.current_votes(HOLDERS[1]) == 16_000
    assert token.delegatee_of(HOLDERS[0]) == HOLDERS[1]


def test_transfer_never_changes_delegatee_choice():
    token = make_token()
    token.delegate(HOLDERS[0], HOLDERS[2], block=1)
    token.transfer(HOLDERS[0], HOLDERS[1], 1_000, block=2)
    token.transfer(HOLDERS[1], HOLDERS[0], 500, block=3)
    assert token.delegatee_of(HOLDERS[0]) == HOLDERS[2]


def test_past_votes_empty_series_is_zero():
    token = make_token()
    assert token.get_past_votes(HOLDERS[3], 0, current_block=5) == 0


def test_past_votes_at_current_block_is_future():
    token = make_token()
    with pytest.raises(EngineError) as e:
        token.get_past_votes(HOLDERS[0], 3, current_block=3)
    assert e.value.code == "FutureBlock"


def test_past_total_supply():
    token = make_token()
    assert token.past_total_supply(0, current_block=2) == 1_000_000
    with pytest.raises(EngineError) as e:
        token.past_total_supply(2, current_block=2)
    assert e.value.code == "FutureBlock"


def test_checkpoint_blocks_strictly_increase():
    token = make_token()
    token.transfer(HOLDERS[0], HOLDERS[1], 1, block=3)
    token.transfer(HOLDERS[0], HOLDERS[1], 1, block=3)  # same-block overwrite
    token.transfer(HOLDERS[0], HOLDERS[1], 1, block=7)
    for series in token.vote_checkpoints.values():
        assert series.blocks == sorted(set(series.blocks))


def test_same_block_writes_overwrite():
    series = CheckpointSeries()
    series.write(4, 100)
    series.write(4, 250)
    assert series.blocks == [4]
    assert series.value_at(4) == 250


def test_randomized_history_matches_replay_oracle():
    # 1,000 random transfer/delegate operations across 200+ blocks, then 100
    # random (addr, block) queries checked against the brute-force oracle.
    rng = random.Random(42)
    allocations = {h: 10_000 for h in HOLDERS[:4]}
    token = make_token(allocations)
    oracle = ReplayOracle(allocations)
    parties = HOLDERS + [CONTRACT]

    block = 0
    for _ in range(1_000):
        block += rng.randint(0, 1)  # some ops share a block
        if rng.random() < 0.6:
            frm, to = rng.sample(parties, 2)
            amount = rng.randint(0, max(token.balance_of(frm), 0))
            if token.balance_of(frm) >= amount:
                token.transfer(frm, to, amount, block)
                oracle.record_transfer(block, frm, to, amount)
        else:
            delegator, delegatee = rng.choice(HOLDERS), rng.choice(HOLDERS)
            token.delegate(delegator, delegatee, block)
            oracle.record_delegate(block, delegator, delegatee)
    assert block >= 200

    current = block + 1
    for _ in range(100):
        who = rng.choice(parties)
        at = rng.randint(0, block)
        assert token.get_past_votes(who, at, current) == oracle.votes_at(who, at), \
            f"mismatch for {who} at block {at}"


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.integers(0, 5_000)), max_size=40))
@settings(max_examples=60, deadline=None)
def test_supply_conserved_under_random_transfers(ops):
    token = make_token()
    for block, (i, j, amount) in enumerate(ops, start=1):
        try:
            token.transfer(HOLDERS[i], HOLDERS[j], amount, block)
        except EngineError:
            pass
    total = sum(token.balances.values())
    assert total == 1_000_000 * 10**18


@given(st.lists(st.tuples(st.sampled_from(["transfer", "delegate"]),
                          st.integers(0, 3), st.integers(0, 3),
                          st.integers(0, 3_000)), max_size=40))
@settings(max_examples=60, deadline=None)
def test_vote_totals_equal_delegated_balances(ops):
    token = make_token()
    for block, (op, i, j, amount) in enumerate(ops, start=1):
        try:
            if op == "transfer":
                token.transfer(HOLDERS[i], HOLDERS[j], amount, block)
            else:
                token.delegate(HOLDERS[i], HOLDERS[j], block)
        except EngineError:
            pass
    total_votes = sum(token.current_votes(h) for h in HOLDERS + [CONTRACT])
    delegated = sum(token.balance_of(h) for h in HOLDERS + [CONTRACT]
                    if token.delegatee_of(h) is not None)
    assert total_votes == delegated
    assert total_votes <= token.total_supply()


def test_past_vote_sums_never_exceed_supply():
    # exhaustive sum over a small fixture at every historical block
    token = make_token()
    token.transfer(HOLDERS[0], HOLDERS[3], 5_000, block=2)
    token.delegate(HOLDERS[3], HOLDERS[3], block=4)
    token.delegate(HOLDERS[1], HOLDERS[2], block=6)
    token.transfer(HOLDERS[2], CONTRACT, 1_000, block=8)
    for block in range(9):
        total = sum(token.get_past_votes(h, block, current_block=9)
                    for h in HOLDERS + [CONTRACT])
        assert total <= token.total_supply()
