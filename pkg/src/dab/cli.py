"""Command-line entry point: scenario replay, cost reports, chain export, serve."""

from __future__ import annotations

import sys
import threading
from decimal import Decimal

import click

from .agent import AgentRuntime
from .config import load_config
from .costs import report_costs, reproduce_reference_fees
from .engine import Engine
from .errors import EngineError
from .ledger import GWEI
from .scenarios import SCENARIO_NAMES, run_all, run_scenario


@click.group()
def main():
    """Deterministic autonomous-building engine and scenario runner."""


@main.command()
@click.argument("scenario")
@click.option("--seed", default=0, show_default=True, help="RNG seed for the simulation.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="TOML configuration file.")
@click.option("--verbose/--quiet", default=True)
def run(scenario: str, seed: int, config_path: str, verbose: bool):
    """Run one scenario (1-6 or 'replay'), or 'all' for the whole suite."""
    cfg = load_config(config_path)
    try:
        reports = run_all(cfg, seed) if scenario == "all" \
            else [run_scenario(scenario, cfg, seed)]
    except EngineError as e:
        raise click.ClickException(str(e))
    failed = 0
    for report in reports:
        click.echo(f"scenario {report.name}: {report.description}")
        if verbose:
            for line in report.log:
                click.echo(f"  . {line}")
        for desc, ok in report.assertions:
            click.echo(f"  [{'PASS' if ok else 'FAIL'}] {desc}")
            failed += 0 if ok else 1
        click.echo(f"  chain digest: {report.digest}")
    if scenario == "all":
        coverage = reports[0].coverage
        click.echo(f"coverage complete: {coverage.complete()}")
        if not coverage.complete():
            failed += 1
    sys.exit(1 if failed else 0)


@main.command()
@click.option("--gas-price", default=1.0, show_default=True,
              help="Uniform gas price in gwei.")
@click.option("--eth-usd", default="2400", show_default=True,
              help="ETH to USD conversion rate.")
@click.option("--reproduce", is_flag=True,
              help="Derive per-row gas prices from the recorded testnet fees.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def costs(gas_price: float, eth_usd: str, reproduce: bool, config_path: str):
    """Print the fee table for every metered operation."""
    cfg = load_config(config_path)
    rate = Decimal(eth_usd)
    if reproduce:
        rows = reproduce_reference_fees(rate)
    else:
        rows = report_costs(cfg.genesis.gas_schedule, int(gas_price * GWEI), rate)
    click.echo(f"{'operation':44} {'gas':>10} {'gas price (wei)':>16} "
               f"{'fee (ETH)':>14} {'fee (USD)':>10}")
    for row in rows:
        click.echo(f"{row.operation:44} {row.gas:>10,} {row.gas_price:>16,} "
                   f"{row.fee_eth:>14f} {row.fee_usd:>10}")


@main.command(name="export-chain")
@click.argument("outfile", type=click.File("w"))
@click.option("--scenario", default="all", show_default=True,
              help="Scenario(s) to run before exporting (1-6, 'replay', or 'all').")
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def export_chain(outfile, scenario: str, seed: int, config_path: str):
    """Run scenario(s) on a fresh chain and export the blocks as JSONL."""
    cfg = load_config(config_path)
    from .scenarios import ScenarioRunner, load_script

    names = SCENARIO_NAMES if scenario == "all" else (scenario,)
    for name in names:
        runner = ScenarioRunner(cfg, seed)
        report = runner.run(load_script(name))
        runner.engine.chain.export_jsonl(outfile)
        click.echo(f"scenario {name}: exported {len(runner.engine.chain.blocks)} "
                   f"blocks ({'pass' if report.passed else 'FAIL'})", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--agent-period", default=None, type=float,
              help="Seconds between autonomous control cycles (0 disables).")
def serve(host: str, port: int, seed: int, config_path: str, agent_period: float):
    """Serve the HTTP API (and the web UI's backend) on a fresh engine."""
    import uvicorn

    from .api import create_app

    cfg = load_config(config_path)
    engine = Engine(cfg.genesis, cfg.sim, seed)
    agent = AgentRuntime(engine, cfg.policy, cfg.pending_ttl)
    app = create_app(engine, agent, cfg)

    period = cfg.agent_period if agent_period is None else agent_period
    stop = threading.Event()
    if period > 0:
        worker = threading.Thread(target=agent.run_loop, args=(period, stop),
                                  daemon=True, name="agent-loop")
        worker.start()
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        stop.set()


if __name__ == "__main__":
    main()
