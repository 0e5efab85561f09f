"""Data-driven scenario scripts and their deterministic runner.

Scripts live as JSON files next to this module; each one runs against a
fresh genesis so replays are exactly reproducible from (script, seed,
config). The runner doubles as the coverage harness: across a full-suite
run it tracks which proposal action kinds executed, which proposal states
were observed, and which agent cycles ran.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from typing import Dict, List, Optional, Tuple

from . import engine as eng
from . import governor as gov
from .agent import AgentRuntime
from .config import AppConfig
from .costs import ExpenseQuote, expense_workflow
from .errors import EngineError, err
from .ledger import ETH
from .registry import to_stored

SCENARIO_NAMES = ("1", "2", "3", "4", "5", "6", "replay")

ALL_ACTION_KINDS = ("send_native", "transfer_governance_tokens", "add_member",
                    "remove_member", "set_threshold")
ALL_PROPOSAL_STATES = ("Pending", "Active", "Defeated", "Succeeded",
                       "Queued", "Executed")


def load_script(name: str) -> dict:
    if name not in SCENARIO_NAMES:
        raise err("UnknownScenario", f"no scenario {name!r}")
    path = resources.files("dab").joinpath("scenario_scripts",
                                           f"scenario_{name}.json")
    return json.loads(path.read_text("utf-8"))


@dataclass
class Coverage:
    executed_action_kinds: set = field(default_factory=set)
    proposal_states_seen: set = field(default_factory=set)
    agent_cycles_run: set = field(default_factory=set)

    def merge(self, other: "Coverage") -> None:
        self.executed_action_kinds |= other.executed_action_kinds
        self.proposal_states_seen |= other.proposal_states_seen
        self.agent_cycles_run |= other.agent_cycles_run

    def complete(self) -> bool:
        return (self.executed_action_kinds >= set(ALL_ACTION_KINDS)
                and self.proposal_states_seen >= set(ALL_PROPOSAL_STATES)
                and self.agent_cycles_run >= {"occupancy", "control"})


@dataclass
class ScenarioReport:
    name: str
    description: str
    log: List[str] = field(default_factory=list)
    assertions: List[Tuple[str, bool]] = field(default_factory=list)
    digest: str = ""
    coverage: Coverage = field(default_factory=Coverage)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.assertions)


class ScenarioRunner:
    def __init__(self, config: AppConfig, seed: int = 0):
        self.config = config
        self.engine = eng.Engine(config.genesis, config.sim, seed)
        self.agent = AgentRuntime(self.engine, config.policy, config.pending_ttl)
        self.vars: Dict[str, object] = {}
        self.start_balances = dict(self.engine.chain.balances)
        self.last_decisions = []
        self.last_quote: Optional[ExpenseQuote] = None
        self.last_pending = None
        self.coverage = Coverage()

    # -- name resolution ------------------------------------------------------

    def resolve_address(self, ref: str) -> str:
        if ref == "treasury":
            return self.engine.treasury_address
        if ref == "fee_sink":
            return self.engine.fee_sink
        if ref == "provider":
            return self.config.economics.provider_address
        if ref.startswith("$"):
            return str(self.vars[ref[1:]])
        return self.engine.address_of(ref)

    def resolve(self, ref):
        if isinstance(ref, str) and ref.startswith("$"):
            return self.vars[ref[1:]]
        return ref

    # -- run ----------------------------------------------------------------

    def run(self, script: dict) -> ScenarioReport:
        report = ScenarioReport(str(script.get("scenario", "?")),
                                script.get("description", ""))
        for step in script["steps"]:
            self._run_step(step, report)
            self._sweep_proposal_states()
        report.digest = self.engine.chain_digest()
        report.coverage = self.coverage
        return report

    def _sweep_proposal_states(self) -> None:
        block = self.engine.chain.current_block
        for pid in list(self.engine.governor.proposals):
            self.coverage.proposal_states_seen.add(
                self.engine.governor.state(pid, block))

    def _run_step(self, step: dict, report: ScenarioReport) -> None:
        op = step["op"]
        handler = getattr(self, f"_op_{op}", None)
        if handler is None:
            raise err("BadScript", f"unknown step op {op!r}")
        handler(step, report)

    # -- step handlers ----------------------------------------------------------

    def _op_submit(self, step: dict, report: ScenarioReport) -> None:
        sender = self.resolve_address(step["sender"])
        action = self._build_action(step["action"])
        expect = step.get("expect_error")
        try:
            result = self.engine.submit(sender, action)
        except EngineError as e:
            self._expect_error(step, report, e.code, expect)
            return
        if result.receipt.status == "reverted":
            self._expect_error(step, report, result.receipt.revert_reason, expect)
            return
        if expect:
            report.assertions.append(
                (f"expected {expect} from {action.kind}, got success", False))
            return
        if step.get("save_as"):
            self.vars[step["save_as"]] = result.value
        if isinstance(action, eng.Execute):
            self._record_executed(action.proposal_id)
        report.log.append(f"submit {action.kind} by {step['sender']}: "
                          f"block {result.receipt.block_number}")

    def _expect_error(self, step: dict, report: ScenarioReport,
                      code: str, expect: Optional[str]) -> None:
        if expect is None:
            report.assertions.append((f"unexpected error {code}", False))
        else:
            ok = code == expect
            report.assertions.append((f"expected error {expect}", ok))
            report.log.append(f"rejected as expected: {code}")

    def _record_executed(self, pid: str) -> None:
        proposal = self.engine.governor.proposals[pid]
        for action in proposal.actions:
            self.coverage.executed_action_kinds.add(_kind_name(action))

    def _op_advance(self, step: dict, report: ScenarioReport) -> None:
        n = step["n"]
        dt = step.get("dt")
        number = self.engine.advance_block(n, dt)
        report.log.append(f"advance {n} blocks -> block {number}")

    def _op_sim(self, step: dict, report: ScenarioReport) -> None:
        cmd = step["cmd"]
        if cmd == "tick":
            for _ in range(step.get("repeat", 1)):
                self.engine.tick_sim(step["dt"])
        elif cmd == "set_appliance":
            self.engine.sim.set_appliance(step["device"], step["level"])
        elif cmd == "set_occupancy":
            self.engine.sim.set_occupancy(step["n"])
        elif cmd == "occupancy_stream":
            self.engine.sim.occupancy_stream(step["seed"], step.get("period"))
        else:
            raise err("BadScript", f"unknown sim cmd {cmd!r}")
        report.log.append(f"sim {cmd}")

    def _op_assistant(self, step: dict, report: ScenarioReport) -> None:
        session = step["session"]
        expect = step.get("expect_error")
        try:
            reply = self.agent.handle_message(self.resolve_address(session),
                                              step["text"])
            if reply.pending is not None:
                self.last_pending = reply.pending
                if step.get("sign"):
                    self.agent.sign_and_submit(self.resolve_address(session),
                                               reply.pending.id)
                    report.log.append(f"assistant signed: {reply.pending.summary}")
        except EngineError as e:
            self._expect_error(step, report, e.code, expect)
            return
        if expect:
            report.assertions.append((f"expected error {expect}", False))
            return
        report.log.append(f"assistant({session}): {step['text']!r} -> {reply.text}")

    def _op_agent_step(self, step: dict, report: ScenarioReport) -> None:
        self.last_decisions = self.agent.step()
        self.coverage.agent_cycles_run |= {"occupancy", "control"}
        report.log.append(f"agent step: {len(self.last_decisions)} decisions")

    def _op_agent_occupancy_cycle(self, step: dict, report: ScenarioReport) -> None:
        self.last_decisions = self.agent.run_occupancy_cycle()
        self.coverage.agent_cycles_run.add("occupancy")
        report.log.append(f"occupancy cycle: {len(self.last_decisions)} decisions")

    def _op_agent_control_cycle(self, step: dict, report: ScenarioReport) -> None:
        self.last_decisions = self.agent.run_control_cycle()
        self.coverage.agent_cycles_run.add("control")
        report.log.append(f"control cycle: {len(self.last_decisions)} decisions")

    def _op_expense_proposal(self, step: dict, report: ScenarioReport) -> None:
        kwh = step.get("kwh", "meter")
        if kwh == "meter":
            kwh = self.engine.sim.read_energy_kwh()
        else:
            kwh = Decimal(str(kwh))
        eco = self.config.economics
        self.last_quote = expense_workflow(kwh, eco.usd_per_kwh, eco.eth_usd,
                                           eco.provider_address)
        result = self.engine.submit(
            self.resolve_address(step["sender"]),
            eng.Propose((self.last_quote.payload,), self.last_quote.description))
        if step.get("save_as"):
            self.vars[step["save_as"]] = result.value
        report.log.append(
            f"expense proposal: {kwh} kWh -> {self.last_quote.eth} ETH")

    def _op_governance_flow(self, step: dict, report: ScenarioReport) -> None:
        """Propose, vote, and (unless defeated) queue + execute in one step."""
        proposer = self.resolve_address(step["proposer"])
        actions = tuple(self._build_proposal_action(a) for a in step["actions"])
        result = self.engine.submit(
            proposer, eng.Propose(actions, step["description"]))
        pid = result.value
        if step.get("save_as"):
            self.vars[step["save_as"]] = pid
        self._sweep_proposal_states()

        self.engine.advance_block(self.config.genesis.governor.voting_delay + 1)
        for ballot in step.get("votes", []):
            self.engine.submit(self.resolve_address(ballot["voter"]),
                               eng.Vote(pid, ballot["support"]))
        self._sweep_proposal_states()
        self.engine.advance_block(self.config.genesis.governor.voting_period)

        state = self.engine.governor.state(pid, self.engine.chain.current_block)
        expected = step.get("expect", "Executed")
        if expected == "Defeated":
            report.assertions.append(
                (f"{step['description']!r} defeated", state == "Defeated"))
            report.log.append(f"governance flow defeated: {step['description']}")
            return
        report.assertions.append(
            (f"{step['description']!r} succeeded", state == "Succeeded"))
        self.engine.submit(proposer, eng.Queue(pid))
        self._sweep_proposal_states()
        spb = self.config.genesis.seconds_per_block
        delay_blocks = -(-self.config.genesis.governor.timelock_min_delay // spb)
        self.engine.advance_block(delay_blocks)
        self.engine.submit(proposer, eng.Execute(pid))
        self._record_executed(pid)
        report.log.append(f"governance flow executed: {step['description']}")

    def _op_assert(self, step: dict, report: ScenarioReport) -> None:
        check = step["check"]
        desc, ok = self._evaluate_check(check, step)
        report.assertions.append((desc, ok))

    # -- checks ----------------------------------------------------------------

    def _evaluate_check(self, check: str, step: dict) -> Tuple[str, bool]:
        if check == "balance":
            addr = self.resolve_address(step["account"])
            want = _base_units(step)
            have = self.engine.chain.balance_of(addr)
            return f"balance({step['account']}) == {want}", have == want
        if check == "balance_delta":
            addr = self.resolve_address(step["account"])
            want = _base_units(step)
            have = (self.engine.chain.balance_of(addr)
                    - self.start_balances.get(addr, 0))
            return f"balance_delta({step['account']}) == {want}", have == want
        if check == "token_balance":
            addr = self.resolve_address(step["account"])
            want = step["equals"]
            return (f"tokens({step['account']}) == {want}",
                    self.engine.token.balance_of(addr) == want)
        if check == "threshold":
            have = self.engine.registry.get_threshold(step["key"])
            return f"threshold {step['key']} == {step['equals']}", \
                have == step["equals"]
        if check == "agent_thresholds":
            have = self.agent.last_thresholds.get(step["key"])
            return f"agent read {step['key']} == {step['equals']}", \
                have == step["equals"]
        if check == "proposal_state":
            pid = self.resolve(step["proposal"])
            state = self.engine.governor.state(pid, self.engine.chain.current_block)
            self.coverage.proposal_states_seen.add(state)
            return f"proposal {step['proposal']} is {step['equals']}", \
                state == step["equals"]
        if check == "appliance":
            have = self.engine.sim.levels[step["device"]]
            return f"{step['device']} level == {step['equals']}", \
                have == step["equals"]
        if check == "decisions":
            want = {(d["device"], d["new_level"]) for d in step["equals"]}
            have = {(d.device, d.new_level) for d in self.last_decisions
                    if d.action == "set_level"}
            return f"decisions == {sorted(want)}", have == want
        if check == "energy":
            want = Decimal(str(step["equals_kwh"]))
            return f"energy == {want} kWh", self.engine.sim.read_energy_kwh() == want
        if check == "booking_status":
            occupied = self.engine.reservation.status(step["room"], step["slot"])
            state = "free" if occupied is None else "occupied"
            return (f"{step['room']}@{step['slot']} is {step['equals']}",
                    state == step["equals"])
        if check == "member_count":
            return (f"member count == {step['equals']}",
                    self.engine.governor.member_count() == step["equals"])
        if check == "expense_eth":
            want = Decimal(str(step["equals"]))
            return (f"expense quote == {want} ETH",
                    self.last_quote is not None and self.last_quote.eth == want)
        raise err("BadScript", f"unknown check {check!r}")

    # -- action building -----------------------------------------------------------

    def _build_action(self, doc: dict) -> eng.TxAction:
        kind = doc["kind"]
        if kind == "transfer_native":
            return eng.TransferNative(self.resolve_address(doc["to"]),
                                      _eth_to_units(doc["amount_eth"]))
        if kind == "transfer_tokens":
            return eng.TransferTokens(self.resolve_address(doc["to"]), doc["amount"])
        if kind == "delegate":
            return eng.Delegate(self.resolve_address(doc["delegatee"]))
        if kind == "propose":
            return eng.Propose(
                tuple(self._build_proposal_action(a) for a in doc["actions"]),
                doc["description"])
        if kind == "vote":
            return eng.Vote(self.resolve(doc["proposal"]), doc["support"])
        if kind == "queue":
            return eng.Queue(self.resolve(doc["proposal"]))
        if kind == "execute":
            return eng.Execute(self.resolve(doc["proposal"]))
        if kind == "book_room":
            value = _eth_to_units(doc["value_eth"]) if "value_eth" in doc \
                else self.engine.reservation.config.booking_fee
            return eng.BookRoom(doc["room"], doc["slot"], value)
        if kind == "cancel_booking":
            return eng.CancelBooking(self.resolve(doc["booking"]))
        raise err("BadScript", f"unknown action kind {kind!r}")

    def _build_proposal_action(self, doc: dict) -> gov.Action:
        return gov.action_from_json(doc, self.resolve_address, to_stored)


def _kind_name(action: gov.Action) -> str:
    return {
        gov.SendNative: "send_native",
        gov.TransferGovernanceTokens: "transfer_governance_tokens",
        gov.AddMember: "add_member",
        gov.RemoveMember: "remove_member",
        gov.SetThreshold: "set_threshold",
    }[type(action)]


def _eth_to_units(amount) -> int:
    scaled = Decimal(str(amount)) * ETH
    if scaled != scaled.to_integral_value():
        raise err("BadAmount", f"{amount} is finer than one base unit")
    return int(scaled)


def _base_units(step: dict) -> int:
    if "equals_eth" in step:
        return _eth_to_units(step["equals_eth"])
    return int(step["equals"])


def run_scenario(name: str, config: AppConfig, seed: int = 0) -> ScenarioReport:
    runner = ScenarioRunner(config, seed)
    return runner.run(load_script(name))


def run_all(config: AppConfig, seed: int = 0) -> List[ScenarioReport]:
    reports = []
    coverage = Coverage()
    for name in SCENARIO_NAMES:
        report = run_scenario(name, config, seed)
        coverage.merge(report.coverage)
        reports.append(report)
    for report in reports:
        report.coverage = coverage
    return reports
