/** Wire types for the engine API. All token and native amounts travel as
 * decimal strings of base units (1 ETH-equivalent = 10^18 base units) and
 * must never pass through a JavaScript float. */

export interface SessionInfo {
  session_id: string;
  account: string;
  role: "member" | "user";
}

export interface AccountInfo {
  name: string;
  address: string;
  balance: string;  // base units
  tokens: string;   // whole tokens
  member: boolean;
}

export interface AccountsResponse {
  accounts: AccountInfo[];
  treasury: { address: string; balance: string; tokens: string };
}

export type ProposalState =
  | "Pending" | "Active" | "Defeated" | "Succeeded" | "Queued" | "Executed";

export interface ProposalAction {
  type: string;
  [key: string]: unknown;
}

export interface Proposal {
  id: string;
  proposer: string;
  description: string;
  actions: ProposalAction[];
  snapshot_block: number;
  vote_start_block: number;
  vote_end_block: number;
  state: ProposalState;
  tally_for: string;
  tally_against: string;
  tally_abstain: string;
  quorum_basis: string;
  quorum_needed: string;
  eta: number | null;
}

export interface ProposalsResponse {
  proposals: Proposal[];
  members: string[];
}

export interface Booking {
  booking_id: number;
  user: string;
  room: string;
  slot: string;
}

export interface ReservationsResponse {
  booking_fee: string;
  bookings: Booking[];
}

export interface Thresholds {
  [key: string]: number;
}

export interface Environment {
  temperature: number;
  humidity: number;
  luminance: number;
  co: number;
  occupancy: number;
  sim_time: number;
  energy_kwh: string;
  appliances: Record<string, number>;
}

export interface RoomsResponse {
  rooms: Record<string, { slot: string; booking_id: number }[]>;
}

export interface PendingTx {
  id: string;
  sender: string;
  summary: string;
  state: string;
  created_at: number;
}

export interface AssistantResponse {
  reply: string;
  data?: Record<string, unknown>;
  pending_tx?: PendingTx;
}

export interface Receipt {
  tx_id: string;
  block_number: number;
  status: "success" | { reverted: string };
  gas_used: number;
  fee: string;
  result?: string;
}

export interface AgentDecision {
  device: string;
  new_level: number | null;
  cause: Record<string, unknown>;
  timestamp: number;
  action: "set_level" | "alert";
}

export interface ChainEvent {
  sequence: number;
  kind: "block" | "proposal_state" | "booking" | "env_tick" | "agent_decision";
  payload: Record<string, unknown>;
}

export interface ApiError {
  code: string;
  message: string;
}
