from __future__ import annotations

import pytest

from dab import engine as eng
from dab.agent import AgentRuntime
from dab.config import AppConfig, load_config


@pytest.fixture()
def config() -> AppConfig:
    return load_config()


@pytest.fixture()
def engine(config) -> eng.Engine:
    return eng.Engine(config.genesis, config.sim, seed=0)


@pytest.fixture()
def agent(engine, config) -> AgentRuntime:
    return AgentRuntime(engine, config.policy, config.pending_ttl)


def addr(engine: eng.Engine, name: str) -> str:
    return engine.accounts[name].address


def _ok(result):
    assert result.receipt.status == "success", result.receipt.revert_reason
    return result


def pass_proposal(engine: eng.Engine, proposer: str, actions, description: str,
                  voters=("manager1", "manager2"), execute: bool = True) -> str:
    """Drive a proposal through the whole lifecycle with default config timing."""
    pid = _ok(engine.submit(proposer, eng.Propose(tuple(actions), description))).value
    engine.advance_block(2)
    for voter in voters:
        _ok(engine.submit(voter, eng.Vote(pid, "for")))
    engine.advance_block(engine.config.governor.voting_period)
    if execute:
        _ok(engine.submit(proposer, eng.Queue(pid)))
        engine.advance_block(10)
        _ok(engine.submit(proposer, eng.Execute(pid)))
    return pid
