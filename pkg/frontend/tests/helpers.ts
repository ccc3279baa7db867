// Shared machinery for the parity suites: spawn the conduct service, wait
// for DOM states, and shell out to the CLI.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export const TESTS_DIR = dirname(fileURLToPath(import.meta.url));
export const REPO_ROOT = resolve(TESTS_DIR, "..", "..");

export interface Service {
  base: string;
  stop: () => void;
}

export async function startService(): Promise<Service> {
  const port = 8900 + Math.floor(Math.random() * 900);
  const store = mkdtempSync(join(tmpdir(), "pkboin12-ui-"));
  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "pkboin12.cli", "serve", "--host", "127.0.0.1", "--port", String(port), "--store", store],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk) => (stderr += chunk));
  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 60_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early (code ${proc.exitCode}): ${stderr}`);
    }
    try {
      const res = await fetch(`${base}/api/v1/scenarios`);
      if (res.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error(`service did not come up on ${base}: ${stderr}`);
    }
    await sleep(100);
  }
  return { base, stop: () => proc.kill() };
}

export function runCli(args: string[]): string {
  const proc = spawnSync("python3", ["-m", "pkboin12.cli", ...args], {
    cwd: REPO_ROOT,
    encoding: "utf-8",
  });
  if (proc.status !== 0) {
    throw new Error(`cli ${args.join(" ")} failed (${proc.status}): ${proc.stderr}`);
  }
  return proc.stdout.trim();
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function waitFor<T>(probe: () => T | null | undefined | false, what: string, timeoutMs = 30_000): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = probe();
    if (got) return got;
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await sleep(25);
  }
}

export function text(root: ParentNode, selector: string): string {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return (node.textContent ?? "").trim();
}
