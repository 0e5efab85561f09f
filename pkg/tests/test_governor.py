from __future__ import annotations

import pytest

from dab import engine as eng
from dab.engine import Engine, TransferNative, BookRoom
from dab.errors import EngineError
from dab.governor import (AddMember, RemoveMember, SendNative, SetThreshold,
                          TransferGovernanceTokens, proposal_id)
from dab.ledger import ETH, dev_address

from conftest import addr, pass_proposal


def submit_expect(engine, sender, action, code):
    result = engine.submit(sender, action)
    assert result.receipt.status == "reverted"
    assert result.receipt.revert_reason == code
    return result


def fund_treasury(engine, bookings=1):
    fee = engine.reservation.config.booking_fee
    for i in range(bookings):
        engine.submit("occupant", BookRoom("BFH-T", f"slot-{i}", fee))


def open_proposal(engine, actions=None, description="adjust humidity floor"):
    actions = actions or [SetThreshold("min_humidity", 45)]
    pid = engine.submit("manager1", eng.Propose(tuple(actions), description)).value
    return pid


def test_propose_sets_snapshot_and_window(engine):
    block = engine.chain.current_block
    pid = open_proposal(engine)
    proposal = engine.governor.proposals[pid]
    cfg = engine.config.governor
    assert proposal.snapshot_block == block + 1 + cfg.voting_delay
    assert proposal.vote_end_block == proposal.snapshot_block + cfg.voting_period
    assert engine.governor.state(pid, engine.chain.current_block) == "Pending"


def test_propose_below_threshold_rejected(engine):
    result = engine.submit("occupant",
                           eng.Propose((SetThreshold("min_humidity", 45),), "x"))
    assert result.receipt.revert_reason == "BelowProposalThreshold"


def test_propose_empty_actions_rejected(engine):
    submit_expect(engine, "manager1", eng.Propose((), "nothing"), "EmptyActions")


def test_duplicate_live_proposal_rejected(engine):
    open_proposal(engine, description="the same text")
    submit_expect(engine, "manager1",
                  eng.Propose((SetThreshold("min_humidity", 45),), "the same text"),
                  "DuplicateProposal")


def test_proposal_id_is_content_hash(engine):
    actions = [SetThreshold("min_humidity", 45)]
    pid = open_proposal(engine, actions, "described")
    assert pid == proposal_id(actions, "described")
    assert pid.startswith("0x") and len(pid) == 66


def test_vote_adds_snapshot_weight(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    result = engine.submit("manager1", eng.Vote(pid, "for"))
    assert result.value == 10_000
    assert engine.governor.proposals[pid].tally_for == 10_000


def test_vote_twice_rejected(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    submit_expect(engine, "manager1", eng.Vote(pid, "against"), "AlreadyVoted")


def test_zero_weight_vote_rejected(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    submit_expect(engine, "occupant", eng.Vote(pid, "for"), "ZeroWeight")


def test_tokens_acquired_after_snapshot_add_no_weight(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    # manager1 hands everything to manager2 after the snapshot
    engine.submit("manager1", eng.TransferTokens(addr(engine, "manager2"), 10_000))
    result = engine.submit("manager2", eng.Vote(pid, "for"))
    assert result.value == 10_000  # snapshot weight, not the live 20,000
    result = engine.submit("manager1", eng.Vote(pid, "for"))
    assert result.value == 10_000  # sender kept their snapshot weight too


def test_quorum_half_of_circulating_member_supply(engine):
    # 30,000 circulating among members; quorum 15,000
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "for"))
    engine.advance_block(engine.config.governor.voting_period)
    assert engine.governor.state(pid, engine.chain.current_block) == "Succeeded"


def test_single_vote_misses_quorum(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.advance_block(engine.config.governor.voting_period)
    assert engine.governor.state(pid, engine.chain.current_block) == "Defeated"


def test_tie_with_quorum_met_is_defeated(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "against"))
    engine.submit("manager3", eng.Vote(pid, "abstain"))
    engine.advance_block(engine.config.governor.voting_period)
    # for+abstain 20,000 meets quorum, but for == against fails strict majority
    assert engine.governor.state(pid, engine.chain.current_block) == "Defeated"


def test_abstain_counts_toward_quorum_only(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "abstain"))
    engine.advance_block(engine.config.governor.voting_period)
    assert engine.governor.state(pid, engine.chain.current_block) == "Succeeded"


def test_queue_sets_eta(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "for"))
    engine.advance_block(engine.config.governor.voting_period)
    before = engine.chain.timestamp
    result = engine.submit("manager1", eng.Queue(pid))
    spb = engine.config.seconds_per_block
    assert result.value == before + spb + engine.config.governor.timelock_min_delay


def test_execute_before_eta_errors(engine):
    pid = pass_proposal(engine, "manager1", [SetThreshold("min_humidity", 45)],
                        "h", execute=False)
    engine.submit("manager1", eng.Queue(pid))
    submit_expect(engine, "manager1", eng.Execute(pid), "TimelockNotElapsed")
    assert engine.registry.get_threshold("min_humidity") == 40


def test_execute_applies_threshold_write(engine):
    pass_proposal(engine, "manager1", [SetThreshold("min_temperature", 170)],
                  "lower min temp")
    assert engine.registry.get_threshold("min_temperature") == 17.0


def test_execute_send_native_pays_from_treasury(engine):
    fund_treasury(engine, bookings=9)
    provider = dev_address("electricity-provider")
    treasury_before = engine.chain.balance_of(engine.treasury_address)
    assert treasury_before == 9 * 10**16
    pass_proposal(engine, "manager1",
                  [SendNative(provider, 16 * 10**14)], "pay the bill")
    assert engine.chain.balance_of(provider) == 16 * 10**14
    # 0.09 ETH minus 0.0016 ETH leaves 0.0884 ETH
    assert engine.chain.balance_of(engine.treasury_address) == 884 * 10**14


def test_send_exceeding_treasury_reverts_whole_proposal(engine):
    pid = pass_proposal(engine, "manager1",
                        [SetThreshold("min_humidity", 45), SendNative(dev_address("x"), ETH)],
                        "overdraw", execute=False)
    engine.submit("manager1", eng.Queue(pid))
    engine.advance_block(10)
    submit_expect(engine, "manager1", eng.Execute(pid), "InsufficientTreasury")
    # the first action's write rolled back with the rest
    assert engine.registry.get_threshold("min_humidity") == 40
    assert engine.governor.state(pid, engine.chain.current_block) == "Queued"


def test_direct_treasury_send_is_unauthorized(engine):
    tx = eng.Transaction(engine.treasury_address,
                         TransferNative(addr(engine, "manager1"), 1),
                         10**9, "guessed-secret")
    with pytest.raises(EngineError) as e:
        engine.submit_tx(tx)
    assert e.value.code == "Unauthorized"


def test_add_member_grants_tokens_and_membership(engine):
    new = addr(engine, "manager4")
    assert not engine.governor.is_member(new)
    pass_proposal(engine, "manager1", [AddMember(new, 10_000)], "add manager4")
    assert engine.governor.is_member(new)
    assert engine.governor.member_count() == 4
    assert engine.token.balance_of(new) == 10_000
    assert engine.token.current_votes(new) == 10_000  # allocation self-delegates


def test_add_existing_member_reverts(engine):
    pid = pass_proposal(engine, "manager1",
                        [AddMember(addr(engine, "manager2"), 0)], "dup member",
                        execute=False)
    engine.submit("manager1", eng.Queue(pid))
    engine.advance_block(10)
    submit_expect(engine, "manager1", eng.Execute(pid), "AlreadyMember")


def test_remove_member_keeps_tokens(engine):
    gone = addr(engine, "manager3")
    pass_proposal(engine, "manager1", [RemoveMember(gone)], "remove manager3")
    assert not engine.governor.is_member(gone)
    assert engine.token.balance_of(gone) == 10_000


def test_remove_non_member_reverts(engine):
    pid = pass_proposal(engine, "manager1",
                        [RemoveMember(addr(engine, "occupant"))], "remove stranger",
                        execute=False)
    engine.submit("manager1", eng.Queue(pid))
    engine.advance_block(10)
    submit_expect(engine, "manager1", eng.Execute(pid), "NotMember")


def test_add_member_gas_schedule_entry(engine):
    assert engine.chain.gas_schedule["add_member"] == 73_610


def test_transfer_governance_tokens_from_reserve(engine):
    reserve_before = engine.token.balance_of(engine.token.contract_address)
    pass_proposal(engine, "manager1",
                  [TransferGovernanceTokens(addr(engine, "occupant"), 750)],
                  "grant tokens")
    assert engine.token.balance_of(addr(engine, "occupant")) == 750
    assert engine.token.balance_of(engine.token.contract_address) == reserve_before - 750


def test_tally_conservation(engine):
    pid = open_proposal(engine)
    engine.advance_block(2)
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "against"))
    engine.submit("manager3", eng.Vote(pid, "abstain"))
    proposal = engine.governor.proposals[pid]
    by_bucket = {"for": 0, "against": 0, "abstain": 0}
    for support, weight in proposal.ballots.values():
        by_bucket[support] += weight
    assert proposal.tally_for == by_bucket["for"]
    assert proposal.tally_against == by_bucket["against"]
    assert proposal.tally_abstain == by_bucket["abstain"]


def test_unknown_proposal_errors(engine):
    submit_expect(engine, "manager1", eng.Vote("0x" + "0" * 64, "for"),
                  "UnknownProposal")


# -- exhaustive illegal-transition sweep -----------------------------------------

def drive_to_state(engine, target: str) -> str:
    """Fresh proposal advanced to the requested lifecycle state."""
    description = f"reach {target} {engine.chain.current_block}"
    pid = open_proposal(engine, description=description)
    if target == "Pending":
        return pid
    engine.advance_block(2)
    if target == "Active":
        return pid
    if target == "Defeated":
        engine.advance_block(engine.config.governor.voting_period)
        return pid
    engine.submit("manager1", eng.Vote(pid, "for"))
    engine.submit("manager2", eng.Vote(pid, "for"))
    engine.advance_block(engine.config.governor.voting_period)
    if target == "Succeeded":
        return pid
    engine.submit("manager1", eng.Queue(pid))
    if target == "Queued":
        return pid
    engine.advance_block(10)
    engine.submit("manager1", eng.Execute(pid))
    return pid


LEGAL = {("Active", "vote"), ("Succeeded", "queue"), ("Queued", "execute")}


@pytest.mark.parametrize("state", ["Pending", "Active", "Defeated", "Succeeded",
                                   "Queued", "Executed"])
@pytest.mark.parametrize("operation", ["vote", "queue", "execute"])
def test_state_machine_exhaustion(engine, state, operation):
    pid = drive_to_state(engine, state)
    assert engine.governor.state(pid, engine.chain.current_block) == state
    action = {"vote": eng.Vote(pid, "for"),
              "queue": eng.Queue(pid),
              "execute": eng.Execute(pid)}[operation]
    if (state, operation) == ("Queued", "execute"):
        engine.advance_block(10)  # clear the timelock so the legal pair succeeds
    exclude = (addr(engine, "manager3"), engine.fee_sink)
    digest = engine.state_digest(exclude)
    result = engine.submit("manager3", action)
    if (state, operation) in LEGAL:
        assert result.receipt.status == "success"
    else:
        assert result.receipt.status == "reverted", (state, operation)
        assert engine.state_digest(exclude) == digest, (state, operation)


def test_no_execution_before_eta_ever(engine):
    # Timelock safety: execution timestamps never precede the eta.
    for i, description in enumerate(("a", "b")):
        pid = pass_proposal(engine, "manager1",
                            [SetThreshold("min_humidity", 41 + i)],
                            description)
        proposal = engine.governor.proposals[pid]
        executed_block, executed_pid = engine.governor.execution_log[-1]
        assert executed_pid == pid
        block = engine.chain.blocks[executed_block]
        assert block.timestamp >= proposal.eta


def test_description_over_4kib_rejected(engine):
    submit_expect(engine, "manager1",
                  eng.Propose((SetThreshold("min_humidity", 45),), "x" * 4097),
                  "DescriptionTooLong")


def test_registry_writes_all_trace_to_executions(engine):
    pass_proposal(engine, "manager1", [SetThreshold("min_temperature", 170)], "a")
    pass_proposal(engine, "manager2", [SetThreshold("max_co", 900)], "b")
    executed_blocks = {block for block, _ in engine.governor.execution_log}
    assert engine.registry.change_log  # writes happened
    for block, _key, _value in engine.registry.change_log:
        assert block in executed_blocks
