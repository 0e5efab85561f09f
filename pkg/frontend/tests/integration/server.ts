/** Spawns the engine API (`dab serve`) for integration tests. */

import { type ChildProcess, spawn } from "node:child_process";

export interface ServerHandle {
  baseUrl: string;
  stop(): Promise<void>;
}

export async function startServer(port: number): Promise<ServerHandle> {
  const child: ChildProcess = spawn(
    "dab", ["serve", "--port", String(port), "--agent-period", "0"],
    { stdio: ["ignore", "pipe", "pipe"] });
  let stderr = "";
  child.stderr?.on("data", (chunk) => { stderr += String(chunk); });

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 20_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early: ${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/thresholds`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error(`server did not come up on :${port}\n${stderr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  return {
    baseUrl,
    stop: () => new Promise((resolve) => {
      child.once("exit", () => resolve());
      child.kill();
    }),
  };
}

export async function waitFor(predicate: () => boolean,
                              timeoutMs = 5_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error("condition never became true");
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}
