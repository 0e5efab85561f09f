"""TOML configuration loading with complete in-code defaults.

Every knob has a default matching the reference deployment, so an empty (or
absent) file yields the stock engine. Sections: [genesis], [governor],
[gas], [sim], [policy], [reservation], [economics].
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agent import PolicyConfig
from .building import SimConfig
from .costs import DEFAULT_ETH_USD, DEFAULT_USD_PER_KWH
from .engine import AccountSpec, GenesisConfig
from .errors import err
from .governor import GovernorConfig
from .ledger import ETH, GWEI, dev_address
from .reservation import ReservationConfig


@dataclass
class EconomicsConfig:
    eth_usd: Decimal = DEFAULT_ETH_USD
    usd_per_kwh: Decimal = DEFAULT_USD_PER_KWH
    provider_address: str = field(default_factory=lambda: dev_address("electricity-provider"))


@dataclass
class AppConfig:
    genesis: GenesisConfig = field(default_factory=GenesisConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    economics: EconomicsConfig = field(default_factory=EconomicsConfig)
    agent_period: int = 600       # seconds between autonomous cycles in serve mode
    pending_ttl: int = 600        # seconds before an unsigned transaction expires


def _fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value).limit_denominator(10**9)


def _eth_amount(value) -> int:
    scaled = Decimal(str(value)) * ETH
    if scaled != scaled.to_integral_value():
        raise err("BadAmount", f"{value} is finer than one base unit")
    return int(scaled)


def load_config(path: Optional[str] = None) -> AppConfig:
    doc = {}
    if path is not None:
        doc = tomllib.loads(Path(path).read_text("utf-8"))

    cfg = AppConfig()

    gov_doc = doc.get("governor", {})
    cfg.genesis.governor = GovernorConfig(
        voting_delay=gov_doc.get("voting_delay", 1),
        voting_period=gov_doc.get("voting_period", 50),
        quorum_fraction=_fraction(gov_doc.get("quorum_fraction", 0.5)),
        quorum_basis=gov_doc.get("quorum_basis", "circulating_member_supply"),
        timelock_min_delay=gov_doc.get("timelock_min_delay", 120),
        proposal_threshold=gov_doc.get("proposal_threshold", 1),
    )

    gas_doc = dict(doc.get("gas", {}))
    if "gas_price_gwei" in gas_doc:
        cfg.genesis.default_gas_price = int(gas_doc.pop("gas_price_gwei") * GWEI)
    cfg.genesis.gas_schedule.update({k: int(v) for k, v in gas_doc.items()})

    genesis_doc = doc.get("genesis", {})
    if "seconds_per_block" in genesis_doc:
        cfg.genesis.seconds_per_block = int(genesis_doc["seconds_per_block"])
    if "token_supply" in genesis_doc:
        cfg.genesis.token_supply = int(genesis_doc["token_supply"])
    if "auto_self_delegate" in genesis_doc:
        cfg.genesis.auto_self_delegate = bool(genesis_doc["auto_self_delegate"])
    if "accounts" in genesis_doc:
        cfg.genesis.accounts = [
            AccountSpec(
                name=a["name"],
                funding=_eth_amount(a.get("funding_eth", 1)),
                tokens=int(a.get("tokens", 0)),
                member=bool(a.get("member", False)),
                address=a.get("address", ""),
            )
            for a in genesis_doc["accounts"]
        ]

    res_doc = doc.get("reservation", {})
    cfg.genesis.reservation = ReservationConfig(
        booking_fee=_eth_amount(res_doc.get("booking_fee_eth", "0.01")),
        refund_on_cancel=bool(res_doc.get("refund_on_cancel", False)),
    )

    sim_doc = doc.get("sim", {})
    sim_fields = {f for f in SimConfig.__dataclass_fields__}
    cfg.sim = SimConfig(**{k: v for k, v in sim_doc.items() if k in sim_fields})

    policy_doc = doc.get("policy", {})
    policy_fields = {f for f in PolicyConfig.__dataclass_fields__}
    cfg.policy = PolicyConfig(**{k: v for k, v in policy_doc.items() if k in policy_fields})

    eco_doc = doc.get("economics", {})
    cfg.economics = EconomicsConfig(
        eth_usd=Decimal(str(eco_doc.get("eth_usd", DEFAULT_ETH_USD))),
        usd_per_kwh=Decimal(str(eco_doc.get("usd_per_kwh", DEFAULT_USD_PER_KWH))),
        provider_address=eco_doc.get("provider_address",
                                     dev_address("electricity-provider")),
    )

    cfg.agent_period = int(doc.get("agent_period", cfg.agent_period))
    cfg.pending_ttl = int(doc.get("pending_ttl", cfg.pending_ttl))
    return cfg
