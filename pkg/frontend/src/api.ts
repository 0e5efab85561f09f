/** Typed client for the engine API.
 *
 * Every mutating call is appended to a replayable traffic log. Session ids
 * are server-generated, so the log stores the acting account and a
 * placeholder instead; replaying against a fresh engine re-creates the
 * sessions and must land on the identical chain digest (the UI itself adds
 * no business logic anywhere).
 */

import type {
  AccountsResponse, AssistantResponse, Environment, Proposal,
  ProposalsResponse, Receipt, ReservationsResponse, RoomsResponse,
  SessionInfo, Thresholds,
} from "./types.js";

export interface RecordedCall {
  method: "POST";
  path: string;
  /** acting account address; replaced by a fresh session id on replay */
  account: string | null;
  body: Record<string, unknown>;
}

export class ApiRequestError extends Error {
  constructor(readonly code: string, message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  readonly log: RecordedCall[] = [];
  private session: SessionInfo | null = null;

  constructor(readonly baseUrl: string,
              private readonly fetchImpl: typeof fetch = fetch) {}

  get currentSession(): SessionInfo | null {
    return this.session;
  }

  private async request<T>(method: "GET" | "POST", path: string,
                           body?: Record<string, unknown>): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body ? { "content-type": "application/json" } : undefined,
      body: body ? JSON.stringify(body) : undefined,
    });
    const doc = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(doc.code ?? "HttpError",
                                doc.message ?? response.statusText,
                                response.status);
    }
    return doc as T;
  }

  private async post<T>(path: string, body: Record<string, unknown>,
                        withSession = true): Promise<T> {
    const payload = withSession
      ? { session: this.requireSession().session_id, ...body }
      : body;
    this.log.push({
      method: "POST", path,
      account: withSession ? this.requireSession().account : null,
      body,
    });
    return this.request<T>("POST", path, payload);
  }

  private requireSession(): SessionInfo {
    if (!this.session) throw new ApiRequestError("NoSession", "pick an account first", 0);
    return this.session;
  }

  // -- session -------------------------------------------------------------

  async openSession(account: string): Promise<SessionInfo> {
    this.session = await this.request<SessionInfo>("POST", "/session", { account });
    return this.session;
  }

  async refreshSession(): Promise<SessionInfo> {
    const current = this.requireSession();
    this.session = await this.request<SessionInfo>(
      "GET", `/session/${current.session_id}`);
    return this.session;
  }

  // -- reads (not recorded; they cannot change the chain) --------------------

  accounts(): Promise<AccountsResponse> {
    return this.request("GET", "/accounts");
  }

  proposals(): Promise<ProposalsResponse> {
    return this.request("GET", "/governor/proposals");
  }

  proposal(id: string): Promise<Proposal> {
    return this.request("GET", `/governor/proposals/${id}`);
  }

  reservations(): Promise<ReservationsResponse> {
    return this.request("GET", "/reservations");
  }

  thresholds(): Promise<{ thresholds: Thresholds }> {
    return this.request("GET", "/thresholds");
  }

  environment(): Promise<Environment> {
    return this.request("GET", "/twin/environment");
  }

  rooms(): Promise<RoomsResponse> {
    return this.request("GET", "/twin/rooms");
  }

  chainInfo(): Promise<{ digest: string; current_block: number }> {
    return this.request("GET", "/chain/digest");
  }

  agentDecisions(): Promise<import("./types.js").AgentDecision[]> {
    return this.request("GET", "/agent/decisions");
  }

  blocks(): Promise<{ current_block: number; timestamp: number }> {
    return this.request("GET", "/blocks?limit=0");
  }

  // -- writes (recorded) ------------------------------------------------------

  propose(actions: Record<string, unknown>[], description: string): Promise<Receipt> {
    return this.post("/governor/propose", { actions, description });
  }

  vote(proposalId: string, support: "for" | "against" | "abstain"): Promise<Receipt> {
    return this.post(`/governor/${proposalId}/vote`, { support });
  }

  queue(proposalId: string): Promise<Receipt> {
    return this.post(`/governor/${proposalId}/queue`, {});
  }

  execute(proposalId: string): Promise<Receipt> {
    return this.post(`/governor/${proposalId}/execute`, {});
  }

  reserve(room: string, slot: string): Promise<Receipt> {
    return this.post("/reserve", { room, slot });
  }

  cancel(bookingId: number): Promise<Receipt> {
    return this.post("/cancel", { booking_id: bookingId });
  }

  assistantMessage(text: string): Promise<AssistantResponse> {
    return this.post("/assistant/message", { text });
  }

  assistantSign(pendingId: string): Promise<Receipt> {
    return this.post("/assistant/sign", { pending_id: pendingId });
  }

  advanceChain(n: number): Promise<{ current_block: number }> {
    return this.post("/chain/advance", { n });
  }
}

/** Replay a recorded traffic log against a fresh engine, re-creating one
 * session per acting account. Returns the final chain digest. */
export async function replayLog(baseUrl: string, log: RecordedCall[],
                                fetchImpl: typeof fetch = fetch): Promise<string> {
  const sessions = new Map<string, string>();
  const request = async (method: string, path: string, body?: unknown) => {
    const response = await fetchImpl(baseUrl + path, {
      method,
      headers: body ? { "content-type": "application/json" } : undefined,
      body: body ? JSON.stringify(body) : undefined,
    });
    return response.json();
  };
  for (const call of log) {
    let body = call.body;
    if (call.account !== null) {
      if (!sessions.has(call.account)) {
        const doc = await request("POST", "/session", { account: call.account });
        sessions.set(call.account, doc.session_id);
      }
      body = { session: sessions.get(call.account), ...call.body };
    }
    await request(call.method, call.path, body);
  }
  const info = await request("GET", "/chain/digest");
  return info.digest as string;
}
