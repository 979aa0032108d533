/** Spawn a real workbench service for the test suite. Requires the Python
 * package to be installed (pip install -e .. --no-build-isolation). */

import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { cpSync, mkdtempSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface LiveService {
  base: string;
  storeDir: string;
  bundleDir: string;
  stop(): void;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        server.close(() => reject(new Error("no port")));
      }
    });
  });
}

function sampleBundlePath(): string {
  const probe = spawnSync(
    "python3",
    ["-c", "from evalbench.artefacts import sample_bundle_path; print(sample_bundle_path())"],
    { encoding: "utf-8" },
  );
  if (probe.status !== 0) {
    throw new Error(`cannot locate the sample bundle: ${probe.stderr}`);
  }
  return probe.stdout.trim();
}

async function waitReady(base: string, proc: ChildProcess, deadlineMs = 30_000): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < deadlineMs) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early with code ${proc.exitCode}`);
    }
    try {
      const response = await fetch(`${base}/bundle`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("service did not become ready");
}

export async function startService(): Promise<LiveService> {
  const workdir = mkdtempSync(join(tmpdir(), "evalbench-ui-"));
  const bundleDir = join(workdir, "bundle");
  const storeDir = join(workdir, "store");
  cpSync(sampleBundlePath(), bundleDir, { recursive: true });
  const port = await freePort();
  const base = `http://127.0.0.1:${port}`;
  const proc = spawn(
    "python3",
    ["-m", "evalbench", "serve", "--bundle", bundleDir, "--store", storeDir,
     "--address", `127.0.0.1:${port}`],
    { stdio: "ignore" },
  );
  await waitReady(base, proc);
  return {
    base,
    storeDir,
    bundleDir,
    stop: () => {
      proc.kill("SIGKILL");
    },
  };
}
