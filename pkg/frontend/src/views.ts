/** Tab renderers: pure functions from store state to HTML strings. All
 * interactivity is declared with data-action attributes and wired by the
 * shell through event delegation, so these stay trivially testable. */

import { formatEth, groupDigits, shortAddress, shortId } from "./format.js";
import type { StoreState } from "./store.js";
import type { Proposal, SessionInfo } from "./types.js";

export type Tab = "governance" | "treasury" | "admin" | "twin" | "user" | "assistant";

export const TABS: { id: Tab; label: string }[] = [
  { id: "governance", label: "Governance" },
  { id: "treasury", label: "Treasury" },
  { id: "admin", label: "Admin" },
  { id: "twin", label: "Digital Twin" },
  { id: "user", label: "User" },
  { id: "assistant", label: "Assistant" },
];

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;").replaceAll("<", "&lt;").replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;").replaceAll("'", "&#39;");
}

function describeAction(action: Record<string, unknown>): string {
  switch (action.type) {
    case "send_native":
      return `send ${formatEth(String(action.amount))} ETH to ${shortAddress(String(action.to))}`;
    case "transfer_tokens":
      return `transfer ${action.amount} tokens to ${shortAddress(String(action.to))}`;
    case "add_member":
      return `add member ${shortAddress(String(action.addr))} with ${action.grant} tokens`;
    case "remove_member":
      return `remove member ${shortAddress(String(action.addr))}`;
    case "set_threshold":
      return `set ${action.key} to ${action.value}`;
    default:
      return JSON.stringify(action);
  }
}

function proposalCard(p: Proposal, state: StoreState,
                      session: SessionInfo | null): string {
  const isMember = session?.role === "member";
  const votable = p.state === "Active" && isMember;
  const blocksLeft = p.vote_end_block - state.currentBlock;
  const countdown =
    p.state === "Pending" ? `voting opens at block ${p.vote_start_block + 1}` :
    p.state === "Active" ? `${blocksLeft} block${blocksLeft === 1 ? "" : "s"} left` :
    p.state === "Queued" && p.eta !== null
      ? `eta t=${p.eta}s (now t=${state.timestamp}s)` : "";
  return `
  <article class="card proposal" data-proposal="${esc(p.id)}">
    <header>
      <span class="badge state-${p.state.toLowerCase()}">${p.state}</span>
      <code title="${esc(p.id)}">${esc(shortId(p.id))}</code>
      ${countdown ? `<span class="countdown">${esc(countdown)}</span>` : ""}
    </header>
    <p class="description">${esc(p.description)}</p>
    <ul class="actions">${p.actions.map((a) => `<li>${esc(describeAction(a))}</li>`).join("")}</ul>
    <p class="tallies">
      for <b>${esc(groupDigits(p.tally_for))}</b> ·
      against <b>${esc(groupDigits(p.tally_against))}</b> ·
      abstain <b>${esc(groupDigits(p.tally_abstain))}</b> ·
      quorum ${esc(groupDigits(p.quorum_needed))}
    </p>
    <footer>
      <button data-action="vote" data-id="${esc(p.id)}" data-support="for"
              ${votable ? "" : "disabled"}>For</button>
      <button data-action="vote" data-id="${esc(p.id)}" data-support="against"
              ${votable ? "" : "disabled"}>Against</button>
      <button data-action="vote" data-id="${esc(p.id)}" data-support="abstain"
              ${votable ? "" : "disabled"}>Abstain</button>
      <button data-action="queue" data-id="${esc(p.id)}"
              ${p.state === "Succeeded" && isMember ? "" : "disabled"}>Queue</button>
      <button data-action="execute" data-id="${esc(p.id)}"
              ${p.state === "Queued" && isMember ? "" : "disabled"}>Execute</button>
    </footer>
  </article>`;
}

export function governanceView(state: StoreState,
                               session: SessionInfo | null): string {
  const isMember = session?.role === "member";
  const proposals = [...state.proposals].reverse();
  return `
  <section>
    <h2>Proposals</h2>
    ${proposals.length ? proposals.map((p) => proposalCard(p, state, session)).join("")
      : '<p class="empty">no proposals yet</p>'}
  </section>
  <section class="card">
    <h2>New proposal</h2>
    ${isMember ? "" : '<p class="hint">membership required to propose</p>'}
    <form id="propose-form" data-action="propose">
      <label>Action
        <select id="propose-kind">
          <option value="set_threshold">set threshold</option>
          <option value="send_native">send ETH from treasury</option>
          <option value="transfer_tokens">send governance tokens</option>
          <option value="add_member">add member</option>
          <option value="remove_member">remove member</option>
        </select>
      </label>
      <label>Key / recipient <input id="propose-target" placeholder="min_temperature or 0x…"></label>
      <label>Value / amount <input id="propose-value" placeholder="17 or 0.0016"></label>
      <label>Description <input id="propose-description" required></label>
      <button type="submit" ${isMember ? "" : "disabled"}>Propose</button>
    </form>
  </section>`;
}

export function treasuryView(state: StoreState): string {
  const treasury = state.accounts?.treasury;
  if (!treasury) return '<p class="empty">loading…</p>';
  return `
  <section class="card">
    <h2>DAO treasury</h2>
    <dl>
      <dt>Address</dt><dd><code>${esc(treasury.address)}</code></dd>
      <dt>Native balance</dt><dd><b>${esc(formatEth(treasury.balance))}</b> ETH</dd>
      <dt>Token reserve</dt><dd><b>${esc(groupDigits(treasury.tokens))}</b> tokens</dd>
    </dl>
    <p class="hint">treasury debits happen only through executed proposals</p>
  </section>
  <section class="card">
    <h2>Comfort thresholds</h2>
    <table>
      <tr><th>variable</th><th>min</th><th>max</th></tr>
      ${["temperature", "humidity", "luminance", "co"].map((family) => `
        <tr><td>${family}</td>
            <td>${esc(state.thresholds[`min_${family}`])}</td>
            <td>${esc(state.thresholds[`max_${family}`])}</td></tr>`).join("")}
    </table>
  </section>`;
}

export function adminView(state: StoreState, session: SessionInfo | null): string {
  const accounts = state.accounts?.accounts ?? [];
  return `
  <section class="card">
    <h2>Member holdings</h2>
    <table>
      <tr><th>account</th><th>address</th><th>ETH</th><th>tokens</th><th>role</th></tr>
      ${accounts.map((a) => `
        <tr class="${session?.account === a.address ? "me" : ""}">
          <td>${esc(a.name)}</td>
          <td><code>${esc(shortAddress(a.address))}</code></td>
          <td>${esc(formatEth(a.balance))}</td>
          <td>${esc(groupDigits(a.tokens))}</td>
          <td>${a.member ? "member" : "user"}</td>
        </tr>`).join("")}
    </table>
  </section>
  <section class="card">
    <h2>Transfer my assets</h2>
    <p class="hint">prepared by the assistant, then signed explicitly</p>
    <form id="transfer-form" data-action="transfer">
      <label>Kind
        <select id="transfer-kind">
          <option value="ether">ETH</option>
          <option value="tokens">governance tokens</option>
        </select>
      </label>
      <label>Amount <input id="transfer-amount" placeholder="0.01"></label>
      <label>Recipient <input id="transfer-to" placeholder="0x…"></label>
      <button type="submit" ${session ? "" : "disabled"}>Prepare</button>
    </form>
  </section>`;
}

export function twinView(state: StoreState): string {
  const env = state.environment;
  const rooms = Object.entries(state.rooms);
  const gauges = env ? [
    ["temperature", `${env.temperature} °C`],
    ["humidity", `${env.humidity} %RH`],
    ["luminance", `${env.luminance} lux`],
    ["carbon monoxide", `${env.co} ppm`],
    ["occupancy", `${env.occupancy}`],
    ["energy (scaled)", `${env.energy_kwh} kWh`],
  ] : [];
  return `
  <section class="card">
    <h2>Environment ${state.streamLive ? '<span class="live">live</span>'
      : '<span class="stale">stream stale</span>'}</h2>
    <div class="gauges">
      ${gauges.map(([label, value]) => `
        <div class="gauge"><span class="value">${esc(value)}</span>
        <span class="label">${esc(label)}</span></div>`).join("")}
    </div>
    <p class="hint">appliances: ${esc(Object.entries(env?.appliances ?? {})
      .map(([k, v]) => `${k}=${v}`).join("  "))}</p>
  </section>
  <section class="card">
    <h2>Rooms</h2>
    <div class="room-grid">
      ${rooms.length ? rooms.map(([room, slots]) => `
        <div class="room ${slots.length ? "occupied" : "free"}" data-room="${esc(room)}">
          <span class="name">${esc(room)}</span>
          <span class="slots">${slots.length
            ? slots.map((s) => esc(s.slot)).join("<br>") : "free"}</span>
        </div>`).join("")
      : '<p class="empty">no rooms booked yet</p>'}
    </div>
  </section>
  <section class="card">
    <h2>Recent agent decisions</h2>
    <ul class="decisions">
      ${state.decisions.slice(-8).reverse().map((d) => `
        <li>${d.action === "alert" ? "⚠" : "·"} ${esc(d.device)}
            ${d.new_level === null ? "" : `→ ${d.new_level}`}
            <small>${esc(JSON.stringify(d.cause))}</small></li>`).join("")}
    </ul>
  </section>`;
}

export function userView(state: StoreState, session: SessionInfo | null): string {
  const mine = state.bookings.filter((b) => b.user === session?.account);
  return `
  <section class="card">
    <h2>Reserve a space</h2>
    <p class="hint">booking fee: <b>${esc(formatEth(state.bookingFee))}</b> ETH,
       paid to the DAO treasury</p>
    <form id="reserve-form" data-action="reserve">
      <label>Room <input id="reserve-room" placeholder="BFH-201" required></label>
      <label>Slot <input id="reserve-slot" placeholder="2024-09-15T10:00" required></label>
      <button type="submit" ${session ? "" : "disabled"}>Book</button>
    </form>
  </section>
  <section class="card">
    <h2>My bookings</h2>
    ${mine.length ? `<table>
      <tr><th>#</th><th>room</th><th>slot</th><th></th></tr>
      ${mine.map((b) => `
        <tr><td>${b.booking_id}</td><td>${esc(b.room)}</td><td>${esc(b.slot)}</td>
        <td><button data-action="cancel" data-id="${b.booking_id}">cancel</button></td></tr>`).join("")}
      </table>` : '<p class="empty">none yet</p>'}
  </section>`;
}

export function assistantView(state: StoreState, speech: boolean): string {
  return `
  <section class="card chat">
    <h2>Assistant</h2>
    <div class="chat-log" id="chat-log">
      ${state.chat.map((entry) => `
        <div class="msg ${entry.who}${entry.error ? " error" : ""}">
          <p>${esc(entry.text)}</p>
          ${entry.pending ? `
            <div class="pending card">
              <p>${esc(entry.pending.summary)}</p>
              <p><small>state: ${esc(entry.pending.state)}</small></p>
              <button data-action="sign" data-id="${esc(entry.pending.id)}"
                      ${entry.pending.state === "awaiting_signature" ? "" : "disabled"}>
                Sign</button>
            </div>` : ""}
        </div>`).join("")}
    </div>
    <form id="chat-form" data-action="chat">
      <input id="chat-input" placeholder='try "turn on the light" or "transfer 0.01 ether to 0x…"'>
      ${speech ? '<button type="button" data-action="speech" title="speak">🎙</button>' : ""}
      <button type="submit">Send</button>
    </form>
  </section>`;
}

export function sessionBar(accounts: { name: string; address: string }[],
                           session: SessionInfo | null,
                           streamLive: boolean): string {
  return `
    <label>Account
      <select id="account-picker">
        <option value="">— pick an account —</option>
        ${accounts.map((a) => `
          <option value="${esc(a.name)}"
                  ${session && a.address === session.account ? "selected" : ""}>
            ${esc(a.name)}</option>`).join("")}
      </select>
    </label>
    <span class="role">${session ? `${esc(session.role)} · ${esc(shortAddress(session.account))}` : "no session"}</span>
    <span class="${streamLive ? "live" : "stale"}">${streamLive ? "● live" : "○ stale"}</span>`;
}
