"""Deterministic assistant and autonomous controller.

The language-model front end is replaced by a keyword-and-slot grammar that
maps each utterance to exactly one typed intent; the tool layer underneath
is identical to what a model-driven parser would call, so the grammar can
be swapped out without touching any tool. Ledger-mutating intents never
touch the chain directly: they produce a pending transaction that only the
owning account's explicit sign step submits.

Two autonomous policies drive the appliances: a threshold policy comparing
sensor readings against the governed comfort bounds, and an occupancy
policy with off / low / high profiles. When both target the same device in
one loop pass, the threshold policy wins.
"""

from __future__ import annotations

import logging
import math
import re
import threading
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Dict, List, Optional, Tuple

from . import engine as eng
from . import governor as gov
from .building import LEVEL_RANGES, EnvState, validate_level
from .errors import EngineError, err
from .ledger import ETH, address
from .registry import THRESHOLD_KEYS, to_stored

log = logging.getLogger("dab.agent")

DEVICE_SYNONYMS = {
    "fan": "fan", "smart fan": "fan",
    "light": "light", "lights": "light", "lamp": "light", "light bulb": "light",
    "smart light": "light", "bulb": "light",
    "purifier": "purifier", "air purifier": "purifier",
    "humidifier": "humidifier", "smart humidifier": "humidifier",
}

ON_LEVELS = {"fan": 1, "purifier": 1, "humidifier": 1, "light": 100}

GOVERNANCE_KINDS = ("propose", "vote", "queue", "execute")

_ADDR = r"0x[0-9a-f]{40}"
_PID = r"0x[0-9a-f]{64}"
_NUM = r"\d+(?:\.\d+)?"


@dataclass(frozen=True)
class Intent:
    kind: str
    device: Optional[str] = None
    level: Optional[int] = None
    amount: Optional[Decimal] = None    # ETH-equivalent for native transfers
    tokens: Optional[int] = None
    address: Optional[str] = None
    room: Optional[str] = None
    slot: Optional[str] = None
    proposal_id: Optional[str] = None
    support: Optional[str] = None
    hint: Optional[str] = None
    message: Optional[str] = None
    proposal_action: Optional[str] = None
    threshold_key: Optional[str] = None
    value: Optional[Decimal] = None


def _decimal(text: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise err("MissingSlot", f"cannot read amount {text!r}")


def eth_to_base_units(amount: Decimal) -> int:
    scaled = amount * ETH
    if scaled != scaled.to_integral_value():
        raise err("BadAmount", "finer than one base unit")
    return int(scaled)


def _device(raw: str) -> str:
    name = DEVICE_SYNONYMS.get(raw.strip())
    if name is None:
        raise err("MissingSlot", f"unknown device {raw.strip()!r}")
    return name


def _threshold_key(raw: str) -> str:
    key = raw.strip().replace(" ", "_")
    if key not in THRESHOLD_KEYS:
        raise err("MissingSlot", f"unknown threshold {raw.strip()!r}")
    return key


def parse_intent(text: str) -> Intent:
    """Map an utterance to exactly one intent, or raise Unrecognized/MissingSlot.

    Matching is case-insensitive; room and slot slots keep the user's casing
    (they are opaque identifiers), everything else canonicalizes to lowercase.
    """
    if not text or not text.strip():
        raise err("Unrecognized", "empty input")
    t = re.sub(r"\s+", " ", text.strip()).rstrip(".!?")
    device_alt = "|".join(sorted(DEVICE_SYNONYMS, key=len, reverse=True))

    def find(pattern: str):
        return re.search(pattern, t, flags=re.IGNORECASE)

    if find(r"\btoo dark\b"):
        return Intent("context_hint", hint="too_dark")
    if find(r"\btoo bright\b"):
        return Intent("context_hint", hint="too_bright")

    m = find(rf"turn on (?:the )?({device_alt})\b") \
        or find(rf"turn (?:the )?({device_alt}) on\b")
    if m:
        return Intent("device_on", device=_device(m.group(1).lower()))
    m = find(rf"turn off (?:the )?({device_alt})\b") \
        or find(rf"turn (?:the )?({device_alt}) off\b")
    if m:
        return Intent("device_off", device=_device(m.group(1).lower()))
    m = find(rf"set (?:the )?({device_alt})(?: brightness| speed| level)?"
             rf" to (?:level )?(\d+)(?: ?%| percent)?$")
    if m:
        return Intent("set_level", device=_device(m.group(1).lower()),
                      level=int(m.group(2)))

    m = find(rf"propose to set ([a-z_ ]+?) to (-?{_NUM})")
    if m:
        return Intent("propose", proposal_action="set_threshold",
                      threshold_key=_threshold_key(m.group(1).lower()),
                      value=_decimal(m.group(2)))
    m = find(rf"propose to send ({_NUM}) (?:eth|ether) to ({_ADDR})")
    if m:
        return Intent("propose", proposal_action="send_native",
                      amount=_decimal(m.group(1)), address=m.group(2).lower())
    m = find(rf"propose to add member ({_ADDR}) with (\d+) tokens?")
    if m:
        return Intent("propose", proposal_action="add_member",
                      address=m.group(1).lower(), tokens=int(m.group(2)))
    m = find(rf"propose to remove member ({_ADDR})")
    if m:
        return Intent("propose", proposal_action="remove_member",
                      address=m.group(1).lower())
    m = find(rf"propose to transfer (\d+) tokens? to ({_ADDR})")
    if m:
        return Intent("propose", proposal_action="transfer_tokens",
                      tokens=int(m.group(1)), address=m.group(2).lower())

    m = find(rf"vote (for|against|abstain) on proposal ({_PID})")
    if m:
        return Intent("vote", support=m.group(1).lower(),
                      proposal_id=m.group(2).lower())
    m = find(rf"queue proposal ({_PID})")
    if m:
        return Intent("queue", proposal_id=m.group(1).lower())
    m = find(rf"execute proposal ({_PID})")
    if m:
        return Intent("execute", proposal_id=m.group(1).lower())

    m = find(rf"(?:transfer|send) ({_NUM}) (?:eth|ether) to ({_ADDR})")
    if m:
        return Intent("transfer_native", amount=_decimal(m.group(1)),
                      address=m.group(2).lower())
    m = find(rf"(?:transfer|send) (\d+) tokens? to ({_ADDR})")
    if m:
        return Intent("transfer_tokens", tokens=int(m.group(1)),
                      address=m.group(2).lower())

    m = find(r"(?:book|reserve) (?:room |space )?(\S+) at (.+)$")
    if m:
        return Intent("reserve", room=m.group(1), slot=m.group(2).strip())
    m = find(r"is (?:room |space )?(\S+) (?:available|free) at (.+)$")
    if m:
        return Intent("check_availability", room=m.group(1), slot=m.group(2).strip())

    m = find(r"(?:send )?(?:an )?alert[:,]? (.+)$")
    if m:
        return Intent("alert", message=m.group(1).strip())

    if find(r"\b(environment|sensors?|readings?|conditions)\b"):
        return Intent("query_environment")

    _raise_missing_slot(t.lower())
    raise err("Unrecognized", f"no rule matches {text.strip()!r}")


def _raise_missing_slot(t: str) -> None:
    """Partial matches: the verb is clear but a required slot is absent."""
    if re.search(r"\b(transfer|send)\b.*\b(eth|ether)\b", t):
        if not re.search(_ADDR, t):
            raise err("MissingSlot", "recipient address")
        raise err("MissingSlot", "amount")
    if re.search(r"\bvote\b.*\bproposal\b", t):
        raise err("MissingSlot", "support (for, against, or abstain)")
    if re.search(r"\bturn (on|off)\b", t) or re.search(r"\bturn\b.+\b(on|off)\b", t):
        raise err("MissingSlot", "device")
    if re.search(r"\b(book|reserve)\b", t) and " at " not in t:
        raise err("MissingSlot", "time slot")
    if re.search(r"\bset\b.*\bto\b", t) and re.search(r"\b(fan|light|purifier|humidifier)\b", t):
        raise err("MissingSlot", "level")


def render_intent(intent: Intent) -> str:
    """Canonical phrase for an intent; parse(render(i)) == i."""
    k = intent.kind
    if k == "device_on":
        return f"turn on the {intent.device}"
    if k == "device_off":
        return f"turn off the {intent.device}"
    if k == "set_level":
        return f"set the {intent.device} to {intent.level}"
    if k == "query_environment":
        return "show the environment readings"
    if k == "alert":
        return f"send an alert: {intent.message}"
    if k == "propose":
        a = intent.proposal_action
        if a == "set_threshold":
            return f"propose to set {intent.threshold_key} to {_fmt(intent.value)}"
        if a == "send_native":
            return f"propose to send {_fmt(intent.amount)} ether to {intent.address}"
        if a == "add_member":
            return f"propose to add member {intent.address} with {intent.tokens} tokens"
        if a == "remove_member":
            return f"propose to remove member {intent.address}"
        if a == "transfer_tokens":
            return f"propose to transfer {intent.tokens} tokens to {intent.address}"
    if k == "vote":
        return f"vote {intent.support} on proposal {intent.proposal_id}"
    if k == "queue":
        return f"queue proposal {intent.proposal_id}"
    if k == "execute":
        return f"execute proposal {intent.proposal_id}"
    if k == "reserve":
        return f"book room {intent.room} at {intent.slot}"
    if k == "check_availability":
        return f"is room {intent.room} available at {intent.slot}"
    if k == "transfer_native":
        return f"transfer {_fmt(intent.amount)} ether to {intent.address}"
    if k == "transfer_tokens":
        return f"send {intent.tokens} tokens to {intent.address}"
    if k == "context_hint":
        return "the room is too dark" if intent.hint == "too_dark" else "the room is too bright"
    raise err("Unrecognized", f"cannot render {k}")


def _fmt(d: Decimal) -> str:
    return format(d, "f")


# -- control policies -----------------------------------------------------------


@dataclass
class PolicyConfig:
    fan_full_scale_delta: float = 1.0    # degC above max for full fan speed
    light_base: float = 50.0             # brightness % at zero deficit
    light_gain: float = 125.0            # brightness % per unit deficit ratio
    purifier_full_scale: float = 200.0   # ppm above max for full purifier
    humidity_full_scale: float = 10.0    # %RH below min for full humidifier
    hint_step: int = 30                  # brightness points per user hint
    low_occupancy_profile: Dict[str, int] = field(
        default_factory=lambda: {"fan": 1, "purifier": 1})
    high_occupancy_profile: Dict[str, int] = field(
        default_factory=lambda: {"fan": 3, "purifier": 7})
    high_occupancy_min: int = 5

    def validate(self) -> None:
        if min(self.fan_full_scale_delta, self.light_gain,
               self.purifier_full_scale, self.humidity_full_scale) <= 0:
            raise err("BadPolicyConfig", "policy gains must be positive")
        for profile in (self.low_occupancy_profile, self.high_occupancy_profile):
            for device, level in profile.items():
                validate_level(device, level)


@dataclass(frozen=True)
class AgentDecision:
    device: str
    new_level: Optional[int]     # None for alerts
    cause: dict
    timestamp: int
    action: str = "set_level"    # "set_level" | "alert"

    def to_json(self) -> dict:
        return {"device": self.device, "new_level": self.new_level,
                "cause": self.cause, "timestamp": self.timestamp,
                "action": self.action}


def _clamp(v: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, v))


def round_to_10(x: float) -> int:
    return int(math.floor(x / 10 + 0.5)) * 10


def control_cycle(thresholds: Dict[str, float], env: EnvState,
                  current: Dict[str, int],
                  cfg: PolicyConfig = None) -> List[AgentDecision]:
    """Threshold policy: one pass over the comfort bounds.

    In-band variables contribute nothing; violations map linearly onto the
    offending device's range. Decisions appear only for levels that would
    actually change, which makes a repeated pass on the same readings empty.
    """
    cfg = cfg or PolicyConfig()
    for family in ("temperature", "humidity", "luminance", "co"):
        if thresholds[f"min_{family}"] > thresholds[f"max_{family}"]:
            raise err("InvertedThresholds", family)

    targets: Dict[str, int] = {}
    alerts: List[Tuple[str, dict]] = []

    t_min, t_max = thresholds["min_temperature"], thresholds["max_temperature"]
    if env.temperature > t_max:
        ratio = _clamp((env.temperature - t_max) / cfg.fan_full_scale_delta, 0, 1)
        targets["fan"] = math.ceil(3 * ratio)
    elif env.temperature < t_min:
        targets["fan"] = 0
        alerts.append(("fan", {"type": "threshold_violation",
                               "key": "min_temperature",
                               "reading": env.temperature}))

    l_min, l_max = thresholds["min_luminance"], thresholds["max_luminance"]
    if env.luminance < l_min:
        raw = cfg.light_base + cfg.light_gain * (l_min - env.luminance) / l_min
        targets["light"] = int(_clamp(round_to_10(raw), 10, 100))
    elif env.luminance > l_max:
        raw = cfg.light_base - cfg.light_gain * (env.luminance - l_max) / l_max
        targets["light"] = int(_clamp(round_to_10(raw), 0, 100))

    co_max = thresholds["max_co"]
    if env.co > co_max:
        ratio = _clamp((env.co - co_max) / cfg.purifier_full_scale, 0, 1)
        targets["purifier"] = math.ceil(7 * ratio)

    rh_min, rh_max = thresholds["min_humidity"], thresholds["max_humidity"]
    if env.humidity < rh_min:
        ratio = _clamp((rh_min - env.humidity) / cfg.humidity_full_scale, 0, 1)
        targets["humidifier"] = math.ceil(3 * ratio)
    elif env.humidity > rh_max:
        targets["humidifier"] = 0

    decisions = []
    for device, level in targets.items():
        if level == current.get(device, 0):
            continue
        cause = {"type": "threshold_violation",
                 "key": _violated_key(device, thresholds, env),
                 "reading": _reading_for(device, env)}
        decisions.append(AgentDecision(device, level, cause, env.sim_time))
        for alert_device, alert_cause in alerts:
            if alert_device == device:
                decisions.append(AgentDecision(device, None, alert_cause,
                                               env.sim_time, action="alert"))
    return decisions


def _violated_key(device: str, thresholds: Dict[str, float], env: EnvState) -> str:
    if device == "fan":
        return "max_temperature" if env.temperature > thresholds["max_temperature"] \
            else "min_temperature"
    if device == "light":
        return "min_luminance" if env.luminance < thresholds["min_luminance"] \
            else "max_luminance"
    if device == "purifier":
        return "max_co"
    return "min_humidity" if env.humidity < thresholds["min_humidity"] else "max_humidity"


def _reading_for(device: str, env: EnvState) -> float:
    return {"fan": env.temperature, "light": env.luminance,
            "purifier": env.co, "humidifier": env.humidity}[device]


def occupancy_cycle(occupancy: int, current: Dict[str, int],
                    cfg: PolicyConfig = None,
                    timestamp: int = 0) -> List[AgentDecision]:
    """Occupancy policy: off when empty, low and high comfort profiles."""
    cfg = cfg or PolicyConfig()
    if occupancy < 0:
        raise err("BadOccupancy", "occupancy cannot be negative")
    if occupancy == 0:
        targets = {device: 0 for device in LEVEL_RANGES}
    elif occupancy < cfg.high_occupancy_min:
        targets = dict(cfg.low_occupancy_profile)
    else:
        targets = dict(cfg.high_occupancy_profile)
    cause = {"type": "occupancy", "count": occupancy}
    return [
        AgentDecision(device, level, cause, timestamp)
        for device, level in targets.items()
        if level != current.get(device, 0)
    ]


# -- assistant runtime -------------------------------------------------------------


@dataclass
class PendingTransaction:
    id: str
    sender: str
    action: eng.TxAction
    created_at: int           # chain timestamp at preparation
    state: str = "awaiting_signature"
    summary: str = ""


@dataclass
class AssistantReply:
    text: str
    pending: Optional[PendingTransaction] = None
    data: Optional[dict] = None


class AgentRuntime:
    """Assistant tool dispatch plus the autonomous control loop."""

    def __init__(self, engine: "eng.Engine", policy: PolicyConfig = None,
                 pending_ttl: int = 600):
        self.engine = engine
        self.policy = policy or PolicyConfig()
        self.policy.validate()
        self.pending_ttl = pending_ttl
        self.pending: Dict[str, PendingTransaction] = {}
        self._pending_counter = 0
        self.decisions: List[AgentDecision] = []
        self.last_thresholds: Dict[str, float] = {}

    # -- assistant ----------------------------------------------------------

    def handle_message(self, sender: str, text: str) -> AssistantReply:
        return self.execute_intent(parse_intent(text), sender)

    def execute_intent(self, intent: Intent, sender: str) -> AssistantReply:
        sender = self.engine.address_of(sender)
        if intent.kind in GOVERNANCE_KINDS and not self.engine.governor.is_member(sender):
            raise err("Unauthorized", "governance actions need DAO membership")

        if intent.kind == "device_on":
            self.engine.sim.set_appliance(intent.device, ON_LEVELS[intent.device])
            return AssistantReply(f"{intent.device} turned on")
        if intent.kind == "device_off":
            self.engine.sim.set_appliance(intent.device, 0)
            return AssistantReply(f"{intent.device} turned off")
        if intent.kind == "set_level":
            self.engine.sim.set_appliance(intent.device, intent.level)
            return AssistantReply(f"{intent.device} set to {intent.level}")
        if intent.kind == "context_hint":
            return self._apply_hint(intent.hint)
        if intent.kind == "query_environment":
            env = self.engine.sim.read_sensors()
            data = {"temperature": env.temperature, "humidity": env.humidity,
                    "luminance": env.luminance, "co": env.co,
                    "occupancy": env.occupancy,
                    "energy_kwh": str(self.engine.sim.read_energy_kwh())}
            text = (f"{env.temperature} degC, {env.humidity}% RH, "
                    f"{env.luminance} lux, {env.co} ppm CO, "
                    f"{env.occupancy} occupants")
            return AssistantReply(text, data=data)
        if intent.kind == "alert":
            decision = AgentDecision("alert", None,
                                     {"type": "user_alert", "message": intent.message},
                                     self.engine.sim.read_sensors().sim_time,
                                     action="alert")
            self._log(decision)
            return AssistantReply(f"alert raised: {intent.message}")
        if intent.kind == "check_availability":
            occupied = self.engine.reservation.status(intent.room, intent.slot)
            if occupied is None:
                return AssistantReply(f"{intent.room} is free at {intent.slot}",
                                      data={"status": "free"})
            return AssistantReply(f"{intent.room} is booked at {intent.slot}",
                                  data={"status": "occupied", "booking_id": occupied})

        action = self._build_tx_action(intent)
        return AssistantReply(
            "transaction prepared; awaiting signature",
            pending=self._prepare(sender, action, render_intent(intent)))

    def sign_and_submit(self, sender: str, pending_id: str) -> "eng.TxResult":
        sender = self.engine.address_of(sender)
        pending = self.pending.get(pending_id)
        if pending is None:
            raise err("UnknownPending", pending_id)
        if pending.sender != sender:
            raise err("WrongSigner", "only the preparing account may sign")
        if pending.state == "submitted":
            raise err("AlreadySubmitted", pending_id)
        now = self.engine.chain.timestamp
        if pending.state == "expired" or now - pending.created_at > self.pending_ttl:
            pending.state = "expired"
            raise err("Expired", f"pending transaction older than {self.pending_ttl}s")
        result = self.engine.submit(sender, pending.action)
        pending.state = "submitted"
        return result

    def _prepare(self, sender: str, action: eng.TxAction,
                 summary: str) -> PendingTransaction:
        self._pending_counter += 1
        pending = PendingTransaction(
            id=f"pt-{self._pending_counter:06d}",
            sender=sender,
            action=action,
            created_at=self.engine.chain.timestamp,
            summary=summary)
        self.pending[pending.id] = pending
        return pending

    def _build_tx_action(self, intent: Intent) -> eng.TxAction:
        k = intent.kind
        if k == "transfer_native":
            return eng.TransferNative(address(intent.address),
                                      eth_to_base_units(intent.amount))
        if k == "transfer_tokens":
            return eng.TransferTokens(address(intent.address), intent.tokens)
        if k == "vote":
            return eng.Vote(intent.proposal_id, intent.support)
        if k == "queue":
            return eng.Queue(intent.proposal_id)
        if k == "execute":
            return eng.Execute(intent.proposal_id)
        if k == "reserve":
            return eng.BookRoom(intent.room, intent.slot,
                                self.engine.reservation.config.booking_fee)
        if k == "propose":
            return eng.Propose((self._build_proposal_action(intent),),
                               render_intent(intent))
        raise err("Unrecognized", f"intent {k} has no tool")

    def _build_proposal_action(self, intent: Intent) -> gov.Action:
        a = intent.proposal_action
        if a == "set_threshold":
            return gov.SetThreshold(intent.threshold_key,
                                    to_stored(intent.threshold_key, float(intent.value)))
        if a == "send_native":
            return gov.SendNative(address(intent.address),
                                  eth_to_base_units(intent.amount))
        if a == "add_member":
            return gov.AddMember(address(intent.address), intent.tokens)
        if a == "remove_member":
            return gov.RemoveMember(address(intent.address))
        if a == "transfer_tokens":
            return gov.TransferGovernanceTokens(address(intent.address), intent.tokens)
        raise err("Unrecognized", f"proposal form {a!r}")

    def _apply_hint(self, hint: str) -> AssistantReply:
        current = self.engine.sim.levels["light"]
        step = self.policy.hint_step if hint == "too_dark" else -self.policy.hint_step
        new = int(_clamp(round_to_10(current + step), 0, 100))
        if new != current:
            self.engine.sim.set_appliance("light", new)
            self._log(AgentDecision("light", new, {"type": "user_hint", "hint": hint},
                                    self.engine.sim.read_sensors().sim_time))
        return AssistantReply(f"brightness adjusted to {new}%")

    # -- autonomous loop ----------------------------------------------------------

    def step(self) -> List[AgentDecision]:
        """One control pass: occupancy profile first, thresholds override.

        The threshold pass runs against the levels the occupancy profile
        would produce, so a violation vetoes a profile change even when the
        device already sits at the safe level (no decision gets emitted for
        a level that is not changing). An empty room is the one exception:
        the switch-everything-off rule dominates there, because letting
        comfort thresholds re-raise devices nobody benefits from makes the
        two policies oscillate through the environment (off -> too dark ->
        light on -> off -> ...).
        """
        try:
            thresholds = self.engine.registry.get_all()
            env = self.engine.sim.read_sensors()
            current = dict(self.engine.sim.levels)
        except EngineError as e:
            log.warning("skipping control cycle, upstream read failed: %s", e)
            return []
        self.last_thresholds = thresholds

        targets = dict(current)
        causes: Dict[str, dict] = {}
        for decision in occupancy_cycle(env.occupancy, current, self.policy,
                                        env.sim_time):
            targets[decision.device] = decision.new_level
            causes[decision.device] = decision.cause
        alerts: List[AgentDecision] = []
        if env.occupancy > 0:
            for decision in control_cycle(thresholds, env, targets, self.policy):
                if decision.action == "alert":
                    alerts.append(decision)
                else:
                    targets[decision.device] = decision.new_level
                    causes[decision.device] = decision.cause

        applied = [AgentDecision(device, level, causes[device], env.sim_time)
                   for device, level in targets.items() if level != current[device]]
        for decision in applied:
            self.engine.sim.set_appliance(decision.device, decision.new_level)
        for decision in applied + alerts:
            self._log(decision)
        return applied + alerts

    def run_occupancy_cycle(self) -> List[AgentDecision]:
        env = self.engine.sim.read_sensors()
        decisions = occupancy_cycle(env.occupancy, dict(self.engine.sim.levels),
                                    self.policy, env.sim_time)
        return self._apply(decisions)

    def run_control_cycle(self) -> List[AgentDecision]:
        env = self.engine.sim.read_sensors()
        decisions = control_cycle(self.engine.registry.get_all(),
                                  env, dict(self.engine.sim.levels), self.policy)
        return self._apply(decisions)

    def _apply(self, decisions: List[AgentDecision]) -> List[AgentDecision]:
        for decision in decisions:
            if decision.action == "set_level":
                self.engine.sim.set_appliance(decision.device, decision.new_level)
            self._log(decision)
        return decisions

    def _log(self, decision: AgentDecision) -> None:
        self.decisions.append(decision)
        self.engine.bus.emit("agent_decision", decision.to_json())

    def run_loop(self, period: float, stop: threading.Event) -> None:
        """Periodic driver for serve mode; tests call step() directly."""
        while not stop.wait(period):
            try:
                with self.engine.write_lock:
                    self.step()
            except EngineError as e:
                log.warning("control cycle failed: %s", e)
