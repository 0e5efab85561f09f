"""HTTP/JSON facade over the engine, plus a server-sent-events stream.

The API adds no business logic: every mutating endpoint is a thin shim over
one engine operation, writes are serialized through a single lock, and all
token/native amounts cross the wire as decimal strings so 10^18-scale
integers survive every JSON implementation.
"""

from __future__ import annotations

import asyncio
import json
import uuid
from decimal import Decimal
from typing import Dict, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from . import engine as eng
from . import governor as gov
from .agent import AgentRuntime
from .config import AppConfig
from .costs import expense_workflow, report_costs, reproduce_reference_fees
from .errors import EngineError, err
from .registry import to_stored

_STATUS_BY_CODE = {
    "Unauthorized": 403,
    "WrongSigner": 403,
    "UnknownProposal": 404,
    "UnknownBooking": 404,
    "UnknownKey": 404,
    "UnknownPending": 404,
    "UnknownScenario": 404,
}


def _proposal_json(engine: eng.Engine, proposal: gov.Proposal) -> dict:
    state = engine.governor.state(proposal.id, engine.chain.current_block)
    basis, fraction = engine.governor.quorum_at_snapshot(proposal)
    return {
        "id": proposal.id,
        "proposer": proposal.proposer,
        "description": proposal.description,
        "actions": [gov.action_to_json(a) for a in proposal.actions],
        "snapshot_block": proposal.snapshot_block,
        "vote_start_block": proposal.vote_start_block,
        "vote_end_block": proposal.vote_end_block,
        "state": state,
        "tally_for": str(proposal.tally_for),
        "tally_against": str(proposal.tally_against),
        "tally_abstain": str(proposal.tally_abstain),
        "quorum_basis": str(basis),
        "quorum_needed": str(-(-basis * fraction.numerator // fraction.denominator)),
        "eta": proposal.eta,
        "ballots": {v: {"support": s, "weight": str(w)}
                    for v, (s, w) in proposal.ballots.items()},
    }


class RevertedTx(EngineError):
    """A submitted transaction reverted; carries the receipt for the body."""

    def __init__(self, receipt_doc: dict):
        reason = receipt_doc["status"]["reverted"]
        super().__init__(reason, f"transaction reverted: {reason}")
        self.receipt_doc = receipt_doc


def _receipt_json(result: eng.TxResult) -> dict:
    """Wire form of a transaction outcome; reverts surface as 4xx errors
    (the fee was still charged, and the receipt rides along in the body)."""
    doc = result.receipt.to_json()
    if result.value is not None:
        doc["result"] = result.value if not isinstance(result.value, int) \
            else str(result.value)
    if result.receipt.status == "reverted":
        raise RevertedTx(doc)
    return doc


def create_app(engine: eng.Engine, agent: AgentRuntime,
               config: AppConfig) -> FastAPI:
    app = FastAPI(title="dab", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    write_lock = engine.write_lock
    sessions: Dict[str, str] = {}  # session id -> account address

    def session_account(doc: dict) -> str:
        session_id = doc.get("session", "")
        if session_id not in sessions:
            raise err("UnknownSession", "create a session via POST /session first")
        return sessions[session_id]

    def role_of(addr: str) -> str:
        return "member" if engine.governor.is_member(addr) else "user"

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        content = {"code": exc.code, "message": exc.message}
        if isinstance(exc, RevertedTx):
            content["receipt"] = exc.receipt_doc
        return JSONResponse(status_code=status, content=content)

    # -- sessions ------------------------------------------------------------

    @app.post("/session")
    def create_session(doc: dict):
        addr = engine.address_of(doc["account"])
        engine.auth_secret_for(addr)  # only dev-mode accounts can act
        session_id = uuid.uuid4().hex
        sessions[session_id] = addr
        return {"session_id": session_id, "account": addr, "role": role_of(addr)}

    @app.get("/session/{session_id}")
    def get_session(session_id: str):
        if session_id not in sessions:
            raise err("UnknownSession", session_id)
        addr = sessions[session_id]
        return {"session_id": session_id, "account": addr, "role": role_of(addr)}

    # -- chain reads ---------------------------------------------------------

    @app.get("/blocks")
    def blocks(start: int = 0, limit: int = 100):
        chunk = engine.chain.blocks[start:start + limit]
        return {"blocks": [b.to_json() for b in chunk],
                "current_block": engine.chain.current_block,
                "timestamp": engine.chain.timestamp}

    @app.get("/chain/digest")
    def chain_digest():
        return {"digest": engine.chain_digest(),
                "current_block": engine.chain.current_block}

    @app.get("/accounts")
    def accounts():
        return {"accounts": [
            {"name": spec.name, "address": spec.address,
             "balance": str(engine.chain.balance_of(spec.address)),
             "tokens": str(engine.token.balance_of(spec.address)),
             "member": engine.governor.is_member(spec.address)}
            for spec in engine.accounts.values()
        ], "treasury": {
            "address": engine.treasury_address,
            "balance": str(engine.chain.balance_of(engine.treasury_address)),
            "tokens": str(engine.token.balance_of(engine.token.contract_address)),
        }}

    @app.get("/accounts/{addr}")
    def account(addr: str):
        resolved = engine.address_of(addr)
        return {"address": resolved,
                "balance": str(engine.chain.balance_of(resolved)),
                "tokens": str(engine.token.balance_of(resolved)),
                "votes": str(engine.token.current_votes(resolved)),
                "member": engine.governor.is_member(resolved)}

    @app.get("/token/balances")
    def token_balances():
        return {"total_supply": str(engine.token.total_supply()),
                "balances": {addr: str(sub // 10**18)
                             for addr, sub in sorted(engine.token.balances.items())
                             if sub}}

    # -- governance ---------------------------------------------------------

    @app.get("/governor/proposals")
    def proposals():
        return {"proposals": [_proposal_json(engine, p)
                              for p in engine.governor.proposals.values()],
                "members": list(engine.governor.members)}

    @app.get("/governor/proposals/{pid}")
    def proposal(pid: str):
        if pid not in engine.governor.proposals:
            raise err("UnknownProposal", pid)
        return _proposal_json(engine, engine.governor.proposals[pid])

    @app.post("/governor/propose")
    def propose(doc: dict):
        sender = session_account(doc)
        actions = tuple(
            gov.action_from_json(a, engine.address_of, to_stored)
            for a in doc["actions"])
        with write_lock:
            result = engine.submit(sender, eng.Propose(actions, doc["description"]))
        return _receipt_json(result)

    @app.post("/governor/{pid}/vote")
    def vote(pid: str, doc: dict):
        sender = session_account(doc)
        with write_lock:
            result = engine.submit(sender, eng.Vote(pid, doc["support"]))
        return _receipt_json(result)

    @app.post("/governor/{pid}/queue")
    def queue(pid: str, doc: dict):
        sender = session_account(doc)
        with write_lock:
            result = engine.submit(sender, eng.Queue(pid))
        return _receipt_json(result)

    @app.post("/governor/{pid}/execute")
    def execute(pid: str, doc: dict):
        sender = session_account(doc)
        with write_lock:
            result = engine.submit(sender, eng.Execute(pid))
        return _receipt_json(result)

    # -- reservations ----------------------------------------------------------

    @app.get("/reservations")
    def reservations(user: Optional[str] = None):
        bookings = engine.reservation.history(engine.address_of(user)) if user \
            else engine.reservation.all_bookings()
        return {"booking_fee": str(engine.reservation.config.booking_fee),
                "bookings": [{"booking_id": b.booking_id, "user": b.user,
                              "room": b.room, "slot": b.slot} for b in bookings]}

    @app.post("/reserve")
    def reserve(doc: dict):
        sender = session_account(doc)
        value = int(doc.get("value", engine.reservation.config.booking_fee))
        with write_lock:
            result = engine.submit(sender,
                                   eng.BookRoom(doc["room"], doc["slot"], value))
        return _receipt_json(result)

    @app.post("/cancel")
    def cancel(doc: dict):
        sender = session_account(doc)
        with write_lock:
            result = engine.submit(sender,
                                   eng.CancelBooking(int(doc["booking_id"])))
        return _receipt_json(result)

    # -- twin + thresholds -----------------------------------------------------

    @app.get("/thresholds")
    def thresholds():
        return {"thresholds": engine.registry.get_all(),
                "units": {"temperature": "degC", "humidity": "%RH",
                          "luminance": "lux", "co": "ppm"}}

    @app.get("/twin/environment")
    def twin_environment():
        env = engine.sim.read_sensors()
        return {"temperature": env.temperature, "humidity": env.humidity,
                "luminance": env.luminance, "co": env.co,
                "occupancy": env.occupancy, "sim_time": env.sim_time,
                "energy_kwh": str(engine.sim.read_energy_kwh()),
                "appliances": dict(engine.sim.levels),
                "units": {"temperature": "degC", "humidity": "%RH",
                          "luminance": "lux", "co": "ppm",
                          "energy_kwh": "kWh"}}

    @app.get("/twin/rooms")
    def twin_rooms():
        return {"rooms": engine.reservation.rooms()}

    # -- assistant ---------------------------------------------------------------

    @app.post("/assistant/message")
    def assistant_message(doc: dict):
        sender = session_account(doc)
        with write_lock:
            reply = agent.handle_message(sender, doc["text"])
        out = {"reply": reply.text}
        if reply.data:
            out["data"] = reply.data
        if reply.pending:
            out["pending_tx"] = {
                "id": reply.pending.id, "sender": reply.pending.sender,
                "summary": reply.pending.summary, "state": reply.pending.state,
                "created_at": reply.pending.created_at,
            }
        return out

    @app.post("/assistant/sign")
    def assistant_sign(doc: dict):
        sender = session_account(doc)
        with write_lock:
            result = agent.sign_and_submit(sender, doc["pending_id"])
        return _receipt_json(result)

    @app.get("/agent/decisions")
    def agent_decisions():
        return [d.to_json() for d in agent.decisions]

    # -- admin (scenario clock) -----------------------------------------------------

    @app.post("/sim/tick")
    def sim_tick(doc: dict):
        with write_lock:
            for _ in range(int(doc.get("repeat", 1))):
                engine.tick_sim(int(doc["dt"]))
        return {"sim_time": engine.sim.sim_time}

    @app.post("/sim/occupancy")
    def sim_occupancy(doc: dict):
        with write_lock:
            if "seed" in doc:
                engine.sim.occupancy_stream(int(doc["seed"]), doc.get("period"))
            else:
                engine.sim.set_occupancy(int(doc["n"]))
        return {"occupancy": engine.sim.occupancy}

    @app.post("/agent/step")
    def agent_step():
        with write_lock:
            decisions = agent.step()
        return {"decisions": [d.to_json() for d in decisions]}

    @app.post("/chain/advance")
    def chain_advance(doc: dict):
        with write_lock:
            number = engine.advance_block(int(doc.get("n", 1)),
                                          doc.get("dt"))
        return {"current_block": number, "timestamp": engine.chain.timestamp}

    # -- costs --------------------------------------------------------------------

    @app.get("/costs")
    def costs(gas_price: Optional[int] = None, reproduce: bool = False):
        eth_usd = config.economics.eth_usd
        if reproduce:
            rows = reproduce_reference_fees(eth_usd)
        else:
            rows = report_costs(engine.chain.gas_schedule,
                                gas_price or engine.config.default_gas_price,
                                eth_usd)
        return {"rows": [{"operation": r.operation, "gas": r.gas,
                          "gas_price": str(r.gas_price),
                          "fee_eth": str(r.fee_eth), "fee_usd": str(r.fee_usd)}
                         for r in rows]}

    @app.get("/expense/quote")
    def expense_quote(kwh: Optional[str] = None):
        eco = config.economics
        amount = Decimal(kwh) if kwh else engine.sim.read_energy_kwh()
        quote = expense_workflow(amount, eco.usd_per_kwh, eco.eth_usd,
                                 eco.provider_address)
        return {"kwh": str(quote.kwh), "usd": str(quote.usd_display),
                "eth": str(quote.eth),
                "amount_base_units": str(quote.amount_base_units),
                "provider": eco.provider_address,
                "description": quote.description,
                "action": gov.action_to_json(quote.payload)}

    # -- events (SSE) ------------------------------------------------------------------

    @app.get("/events")
    async def events(request: Request, from_sequence: Optional[int] = None,
                     follow: bool = True):
        """Replay buffered events from a sequence number, then follow live.

        ``follow=false`` closes the stream after the replay, for scripted
        consumers that only want to catch up.
        """
        if from_sequence is None:
            header = request.headers.get("last-event-id")
            from_sequence = int(header) + 1 if header else None

        backlog = engine.bus.replay(from_sequence) if from_sequence is not None else []
        last_seen = backlog[-1].sequence if backlog \
            else engine.bus.current_sequence

        async def stream():
            nonlocal last_seen
            for event in backlog:
                yield _sse(event)
            if not follow:
                return
            idle = 0.0
            while not await request.is_disconnected():
                fresh = engine.bus.since(last_seen)
                if fresh:
                    for event in fresh:
                        last_seen = event.sequence
                        yield _sse(event)
                    idle = 0.0
                else:
                    await asyncio.sleep(0.05)
                    idle += 0.05
                    if idle >= 15.0:
                        idle = 0.0
                        yield ": keepalive\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache",
                                          "X-Accel-Buffering": "no"})

    return app


def _sse(event) -> str:
    payload = json.dumps(event.payload, separators=(",", ":"))
    return f"id: {event.sequence}\nevent: {event.kind}\ndata: {payload}\n\n"
