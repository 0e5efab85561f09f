/** Browser shell: session picker, tab switching, event delegation, and the
 * SSE subscription. All state lives in the store; this file only mounts
 * rendered HTML and forwards user actions to the API client. */

import { ApiClient, ApiRequestError } from "./api.js";
import { parseEth } from "./format.js";
import { EventStream } from "./sse.js";
import { Store } from "./store.js";
import {
  TABS, Tab, adminView, assistantView, governanceView, sessionBar,
  treasuryView, twinView, userView,
} from "./views.js";

const params = new URLSearchParams(location.search);
const baseUrl = params.get("api")
  ?? localStorage.getItem("dab-api")
  ?? "http://127.0.0.1:8000";
localStorage.setItem("dab-api", baseUrl);

const api = new ApiClient(baseUrl);
const store = new Store(api);
let activeTab: Tab = "governance";
let accountNames: { name: string; address: string }[] = [];

const root = document.getElementById("app")!;
const bar = document.getElementById("session-bar")!;
const tabsNode = document.getElementById("tabs")!;
const toast = document.getElementById("toast")!;

interface SpeechRecognitionLike {
  new(): { lang: string; onresult: (e: any) => void; start(): void };
}
const speechCtor: SpeechRecognitionLike | undefined =
  (window as any).SpeechRecognition ?? (window as any).webkitSpeechRecognition;

function render(): void {
  const session = api.currentSession;
  bar.innerHTML = sessionBar(accountNames, session, store.state.streamLive);
  tabsNode.innerHTML = TABS.map(({ id, label }) =>
    `<button class="tab ${id === activeTab ? "active" : ""}"
             data-action="tab" data-id="${id}">${label}</button>`).join("");
  switch (activeTab) {
    case "governance": root.innerHTML = governanceView(store.state, session); break;
    case "treasury": root.innerHTML = treasuryView(store.state); break;
    case "admin": root.innerHTML = adminView(store.state, session); break;
    case "twin": root.innerHTML = twinView(store.state); break;
    case "user": root.innerHTML = userView(store.state, session); break;
    case "assistant": root.innerHTML = assistantView(store.state, Boolean(speechCtor)); break;
  }
}

function say(message: string, isError = false): void {
  toast.textContent = message;
  toast.className = isError ? "error show" : "show";
  setTimeout(() => { toast.className = ""; }, 4000);
}

async function guarded(work: () => Promise<unknown>): Promise<void> {
  try {
    await work();
  } catch (error) {
    if (error instanceof ApiRequestError) say(`${error.code}: ${error.message}`, true);
    else say(String(error), true);
  }
}

function input(id: string): string {
  return (document.getElementById(id) as HTMLInputElement).value.trim();
}

function proposalActionFromForm(): Record<string, unknown> {
  const kind = input("propose-kind");
  const target = input("propose-target");
  const value = input("propose-value");
  switch (kind) {
    case "set_threshold": return { type: kind, key: target, value: Number(value) };
    case "send_native": return { type: kind, to: target, amount: parseEth(value) };
    case "transfer_tokens": return { type: kind, to: target, amount: value };
    case "add_member": return { type: kind, addr: target, grant: value || "0" };
    case "remove_member": return { type: kind, addr: target };
    default: throw new Error(`unknown action ${kind}`);
  }
}

document.addEventListener("click", (event) => {
  const node = (event.target as HTMLElement).closest("[data-action]");
  if (!(node instanceof HTMLElement) || node.dataset.action === undefined) return;
  const { action, id, support } = node.dataset;
  if (node instanceof HTMLButtonElement && node.type === "submit") return;
  switch (action) {
    case "tab":
      activeTab = id as Tab;
      render();
      break;
    case "vote":
      void guarded(async () => {
        await api.vote(id!, support as "for" | "against" | "abstain");
        say(`vote ${support} cast`);
      });
      break;
    case "queue":
      void guarded(async () => { await api.queue(id!); say("queued"); });
      break;
    case "execute":
      void guarded(async () => { await api.execute(id!); say("executed"); });
      break;
    case "cancel":
      void guarded(async () => { await api.cancel(Number(id)); say("cancelled"); });
      break;
    case "sign":
      void guarded(() => store.signPending(id!));
      break;
    case "speech": {
      if (!speechCtor) break;
      const recognizer = new speechCtor();
      recognizer.lang = "en-US";
      recognizer.onresult = (e: any) => {
        const text = e.results[0][0].transcript;
        (document.getElementById("chat-input") as HTMLInputElement).value = text;
      };
      recognizer.start();
      break;
    }
  }
});

document.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (!form.dataset.action) return;
  event.preventDefault();
  switch (form.dataset.action) {
    case "propose":
      void guarded(async () => {
        await api.propose([proposalActionFromForm()], input("propose-description"));
        say("proposal submitted");
      });
      break;
    case "reserve":
      void guarded(async () => {
        await api.reserve(input("reserve-room"), input("reserve-slot"));
        say("booked");
      });
      break;
    case "transfer":
      void guarded(async () => {
        const kind = input("transfer-kind");
        const text = kind === "ether"
          ? `transfer ${input("transfer-amount")} ether to ${input("transfer-to")}`
          : `send ${input("transfer-amount")} tokens to ${input("transfer-to")}`;
        await store.sendChat(text);
        activeTab = "assistant";
        render();
      });
      break;
    case "chat": {
      const text = input("chat-input");
      if (text) {
        (document.getElementById("chat-input") as HTMLInputElement).value = "";
        void guarded(() => store.sendChat(text));
      }
      break;
    }
  }
});

document.addEventListener("change", (event) => {
  const node = event.target as HTMLElement;
  if (node.id === "account-picker") {
    const name = (node as HTMLSelectElement).value;
    if (name) {
      void guarded(async () => {
        await api.openSession(name);
        render();
      });
    }
  }
});

const stream = new EventStream(baseUrl, {
  onEvent: (e) => store.applyEvent(e),
  onStatus: (live) => store.setStreamLive(live),
});

store.onChange(render);

void guarded(async () => {
  const accounts = await api.accounts();
  accountNames = accounts.accounts.map(({ name, address }) => ({ name, address }));
  await store.hydrate();
  stream.start(1);
});
