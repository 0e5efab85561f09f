/** View-model: caches hydrated from the GET endpoints, patched by stream
 * events. Contains zero business logic; every displayed value is traceable
 * to an API response or event payload. */

import { ApiRequestError, type ApiClient } from "./api.js";
import type {
  AccountsResponse, AgentDecision, Booking, ChainEvent, Environment,
  PendingTx, Proposal, ProposalsResponse, Thresholds,
} from "./types.js";

function describeError(error: unknown): string {
  if (error instanceof ApiRequestError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

export interface ChatEntry {
  who: "you" | "assistant";
  text: string;
  pending?: PendingTx;
  error?: string;
}

export interface StoreState {
  accounts: AccountsResponse | null;
  proposals: Proposal[];
  members: string[];
  bookings: Booking[];
  bookingFee: string;
  thresholds: Thresholds;
  environment: Environment | null;
  rooms: Record<string, { slot: string; booking_id: number }[]>;
  decisions: AgentDecision[];
  chat: ChatEntry[];
  currentBlock: number;
  timestamp: number;
  streamLive: boolean;
}

export class Store {
  readonly state: StoreState = {
    accounts: null,
    proposals: [],
    members: [],
    bookings: [],
    bookingFee: "0",
    thresholds: {},
    environment: null,
    rooms: {},
    decisions: [],
    chat: [],
    currentBlock: 0,
    timestamp: 0,
    streamLive: false,
  };

  private listeners: (() => void)[] = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Initial hydration; afterwards freshness is purely event-driven. */
  async hydrate(): Promise<void> {
    const [accounts, proposals, reservations, thresholds,
           environment, rooms, chain, decisions] = await Promise.all([
      this.api.accounts(), this.api.proposals(), this.api.reservations(),
      this.api.thresholds(), this.api.environment(), this.api.rooms(),
      this.api.chainInfo(), this.api.agentDecisions(),
    ]);
    this.state.accounts = accounts;
    this.applyProposals(proposals);
    this.state.bookings = reservations.bookings;
    this.state.bookingFee = reservations.booking_fee;
    this.state.thresholds = thresholds.thresholds;
    this.state.environment = environment;
    this.state.rooms = rooms.rooms;
    this.state.currentBlock = chain.current_block;
    this.state.decisions = decisions;
    this.notify();
  }

  private applyProposals(doc: ProposalsResponse): void {
    this.state.proposals = doc.proposals;
    this.state.members = doc.members;
  }

  setStreamLive(live: boolean): void {
    if (this.state.streamLive !== live) {
      this.state.streamLive = live;
      this.notify();
    }
  }

  /** Patch the caches from one stream event; booking and environment events
   * apply synchronously (the twin tile must flip on the event itself). */
  applyEvent(event: ChainEvent): void {
    switch (event.kind) {
      case "booking": {
        const room = String(event.payload.room);
        const slot = String(event.payload.slot);
        const bookingId = Number(event.payload.booking_id);
        const slots = (this.state.rooms[room] ?? []).filter(
          (entry) => entry.slot !== slot);
        if (event.payload.status === "occupied") {
          slots.push({ slot, booking_id: bookingId });
          this.state.bookings = [...this.state.bookings, {
            booking_id: bookingId, user: String(event.payload.user), room, slot,
          }];
        } else {
          this.state.bookings = this.state.bookings.filter(
            (booking) => booking.booking_id !== bookingId);
        }
        this.state.rooms = { ...this.state.rooms, [room]: slots };
        break;
      }
      case "env_tick": {
        const p = event.payload;
        this.state.environment = {
          ...(this.state.environment ?? ({} as Environment)),
          temperature: Number(p.temperature),
          humidity: Number(p.humidity),
          luminance: Number(p.luminance),
          co: Number(p.co),
          occupancy: Number(p.occupancy),
          sim_time: Number(p.sim_time),
          energy_kwh: String(p.energy_kwh),
          appliances: this.state.environment?.appliances ?? {},
        };
        break;
      }
      case "agent_decision": {
        const decision = event.payload as unknown as AgentDecision;
        this.state.decisions = [...this.state.decisions, decision];
        if (decision.action === "set_level" && this.state.environment
            && decision.new_level !== null) {
          this.state.environment = {
            ...this.state.environment,
            appliances: {
              ...this.state.environment.appliances,
              [decision.device]: decision.new_level,
            },
          };
        }
        break;
      }
      case "block": {
        this.state.currentBlock = Number(event.payload.number);
        this.state.timestamp = Number(event.payload.timestamp);
        if (event.payload.tx_id) {
          // a transaction landed: refresh balance- and proposal-bearing views
          void this.refreshAfterBlock();
        }
        break;
      }
      case "proposal_state": {
        void this.refreshProposals();
        break;
      }
    }
    this.notify();
  }

  private async refreshAfterBlock(): Promise<void> {
    try {
      const [accounts, environment] = await Promise.all([
        this.api.accounts(), this.api.environment()]);
      this.state.accounts = accounts;
      this.state.environment = environment;
      this.notify();
    } catch {
      // transient; the next event retries
    }
  }

  private async refreshProposals(): Promise<void> {
    try {
      const [proposals, thresholds] = await Promise.all([
        this.api.proposals(), this.api.thresholds()]);
      this.applyProposals(proposals);
      this.state.thresholds = thresholds.thresholds;
      this.notify();
    } catch {
      // transient; the next event retries
    }
  }

  // -- assistant conversation ----------------------------------------------

  async sendChat(text: string): Promise<void> {
    this.state.chat = [...this.state.chat, { who: "you", text }];
    this.notify();
    try {
      const response = await this.api.assistantMessage(text);
      this.state.chat = [...this.state.chat, {
        who: "assistant", text: response.reply, pending: response.pending_tx,
      }];
    } catch (error) {
      const message = describeError(error);
      this.state.chat = [...this.state.chat,
                         { who: "assistant", text: message, error: message }];
    }
    this.notify();
  }

  async signPending(pendingId: string): Promise<void> {
    try {
      const receipt = await this.api.assistantSign(pendingId);
      this.markPendingSigned(pendingId, `submitted in block ${receipt.block_number}`);
    } catch (error) {
      // reverted transactions also land here (4xx with the revert code);
      // they were submitted and fee-charged, so the card closes either way
      this.markPendingSigned(pendingId, describeError(error));
    }
  }

  private markPendingSigned(pendingId: string, status: string): void {
    this.state.chat = this.state.chat.map((entry) =>
      entry.pending?.id === pendingId
        ? { ...entry, pending: { ...entry.pending, state: "submitted" }, text: `${entry.text} — ${status}` }
        : entry);
    this.notify();
  }
}
