// End-to-end acceptance against a live registry gateway:
//  - wizard equivalence: the wizard-created record equals (canonical bytes)
//    one created via the CLI with the same inputs
//  - discovery parity: UI-rendered counts equal direct API counts for ten
//    scripted facet interactions, and a copied URL restores the same page
//  - listed-mode rendering: anonymous stub with no download control
//
// Spawns `componenthub serve` from the repository root; requires the Python
// package to be installed (pip install -e ..).

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { canonicalDocument } from "../src/canonical.js";
import { renderDiscovery } from "../src/discovery/view.js";
import { renderWizard } from "../src/wizard/view.js";
import type { RecordFull } from "../src/types.js";

const REPO_ROOT = resolve(__dirname, "../..");
const TOKEN_SECRET = "e2e-ui-secret";

const pythonOk =
  spawnSync("python3", ["-c", "import componenthub"], { cwd: REPO_ROOT }).status === 0;

let server: ChildProcess | null = null;
let baseUrl = "";
let contributorToken = "";

function issueToken(): string {
  const snippet = [
    "from datetime import timedelta",
    "from componenthub.access import Principal, TokenVerifier",
    "from componenthub.clock import RealClock",
    "clock = RealClock()",
    `verifier = TokenVerifier(secret=b"${TOKEN_SECRET}", clock=clock)`,
    "principal = Principal(subject='erin', display_name='Erin', " +
      "enclaves=frozenset({'hpc'}), roles=frozenset({'contributor'}))",
    "print(verifier.issue(principal, clock.now() + timedelta(hours=2)))",
  ].join("\n");
  const result = spawnSync("python3", ["-c", snippet], { cwd: REPO_ROOT, encoding: "utf-8" });
  if (result.status !== 0) throw new Error(`token issue failed: ${result.stderr}`);
  return result.stdout.trim();
}

async function startServer(): Promise<void> {
  const dir = mkdtempSync(join(tmpdir(), "componenthub-e2e-"));
  const configPath = join(dir, "config.yaml");
  writeFileSync(
    configPath,
    [
      "namespace: olcf",
      "listen_host: 127.0.0.1",
      "listen_port: 0",
      `storage_path: ${join(dir, "registry.db")}`,
      `token_secret: ${TOKEN_SECRET}`,
    ].join("\n"),
  );
  process.env.COMPONENTHUB_CONFIG = configPath;

  server = spawn("python3", ["-m", "componenthub.cli", "serve", "--config", configPath], {
    cwd: REPO_ROOT,
  });
  baseUrl = await new Promise<string>((resolvePromise, rejectPromise) => {
    const timer = setTimeout(() => rejectPromise(new Error("server start timeout")), 30000);
    let buffer = "";
    server!.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on ([\d.]+):(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolvePromise(`http://${match[1]}:${match[2]}`);
      }
    });
    server!.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    server!.on("exit", (code) => {
      clearTimeout(timer);
      rejectPromise(new Error(`server exited early (${code}): ${buffer}`));
    });
  });
}

function runCli(args: string[]): string {
  const result = spawnSync(
    "python3",
    ["-m", "componenthub.cli", ...args],
    {
      cwd: REPO_ROOT,
      encoding: "utf-8",
      env: { ...process.env, COMPONENTHUB_TOKEN: contributorToken },
    },
  );
  if (result.status !== 0) {
    throw new Error(`cli ${args[0]} failed (${result.status}): ${result.stderr}`);
  }
  return result.stdout.trim();
}

async function waitFor(predicate: () => boolean, ms = 15000): Promise<void> {
  const deadline = Date.now() + ms;
  for (;;) {
    for (let i = 0; i < 25; i++) await Promise.resolve();
    if (predicate()) return;
    if (Date.now() > deadline) throw new Error("waitFor timeout");
    await new Promise((resolveTick) => setTimeout(resolveTick, 20));
  }
}

function setField(root: HTMLElement, label: string, value: string): void {
  const fields = [...root.querySelectorAll(".field")];
  for (const field of fields) {
    if (field.querySelector("label")?.textContent?.startsWith(label)) {
      const input = field.querySelector("input, textarea, select") as
        | HTMLInputElement
        | HTMLTextAreaElement
        | HTMLSelectElement;
      input.value = value;
      // cover both listener styles: live fields use input, facets use change
      input.dispatchEvent(new Event("input"));
      input.dispatchEvent(new Event("change"));
      return;
    }
  }
  throw new Error(`no field labelled ${label}`);
}

function clickButton(root: HTMLElement, text: string): void {
  const button = [...root.querySelectorAll("button")].find((b) => b.textContent === text);
  if (!button) throw new Error(`no button ${text}`);
  (button as HTMLButtonElement).click();
}

const WIZARD_INPUTS = {
  name: "wizard-made",
  description: "Registered through the guided wizard for the equivalence check.",
  keywords: "wizard, parity",
  license: "Apache-2.0",
  author: "Erin",
  source: "https://git.example.org/lab/wizard-made",
};

describe.skipIf(!pythonOk)("gateway end-to-end", () => {
  beforeAll(async () => {
    contributorToken = issueToken();
    await startServer();
  }, 60000);

  afterAll(() => {
    server?.kill("SIGINT");
  });

  it("wizard submission equals a CLI registration with the same inputs", async () => {
    document.body.innerHTML = '<div id="root"></div>';
    const root = document.getElementById("root")!;
    const client = new GatewayClient(baseUrl);
    client.setToken(contributorToken);
    renderWizard(root, client);

    // step 1: basics
    setField(root, "Name", WIZARD_INPUTS.name);
    setField(root, "Description", WIZARD_INPUTS.description);
    setField(root, "Kind", "workflow");
    setField(root, "Keywords", WIZARD_INPUTS.keywords);
    clickButton(root, "Next");

    // step 2: sources
    clickButton(root, "Add source");
    setField(root, "Scheme", "git");
    setField(root, "Locator", WIZARD_INPUTS.source);
    clickButton(root, "Next");

    // step 3: license & authors
    setField(root, "License", WIZARD_INPUTS.license);
    clickButton(root, "Add author");
    setField(root, "Author name", WIZARD_INPUTS.author);
    clickButton(root, "Next");

    // step 4: visibility (defaults: public, contributor's enclave)
    clickButton(root, "Next");

    // step 5: review shows the canonical bytes, then submit
    const review = root.querySelector(".review-bytes")!.textContent!;
    clickButton(root, "Register component");
    await waitFor(() => root.querySelector(".pid-line") !== null);
    const wizardPid = root.querySelector(".pid-line")!.textContent!;
    expect(wizardPid).toMatch(/^olcf:wf-\d{8}$/);

    // the FAIR report rendered from the server
    await waitFor(() => root.textContent!.includes("FAIR score"));

    // CLI twin with the same inputs
    const docPath = join(mkdtempSync(join(tmpdir(), "cli-doc-")), "doc.json");
    writeFileSync(
      docPath,
      JSON.stringify({
        name: WIZARD_INPUTS.name,
        description: WIZARD_INPUTS.description,
        kind: "workflow",
        license: WIZARD_INPUTS.license,
        authors: [{ name: WIZARD_INPUTS.author }],
        keywords: ["wizard", "parity"],
      }),
    );
    const cliPid = runCli([
      "register",
      "--document",
      docPath,
      "--source",
      `git:${WIZARD_INPUTS.source}`,
    ]);

    const wizardRecord = (await client.resolve(wizardPid)) as RecordFull;
    const cliRecord = (await client.resolve(cliPid)) as RecordFull;
    const wizardBytes = canonicalDocument(wizardRecord.document);
    expect(wizardBytes).toBe(canonicalDocument(cliRecord.document));
    // and the review preview promised exactly these bytes
    expect(review).toBe(wizardBytes);
  }, 60000);

  it("discovery counts match the API for ten scripted interactions", async () => {
    const client = new GatewayClient(baseUrl);
    client.setToken(contributorToken);
    // seed a recognizable corpus
    for (let i = 0; i < 6; i++) {
      await client.register(
        {
          name: `facet-${i}`,
          description: "Seeded record for the discovery parity interaction script.",
          kind: i % 2 ? "dataset" : "workflow",
          license: i % 3 ? "MIT" : "Apache-2.0",
          authors: [{ name: "Erin" }],
          keywords: i % 2 ? ["even"] : ["odd", "gpu"],
        },
        [{ scheme: "git", locator: `https://git.example.org/seed/${i}` }],
        { visibility: "public" },
      );
    }

    document.body.innerHTML = '<div id="root"></div>';
    window.location.hash = "#/discover";
    const root = document.getElementById("root")!;
    const anonymous = new GatewayClient(baseUrl);
    renderDiscovery(root, anonymous);

    const interactions: Array<Record<string, string | boolean>> = [
      { kind: "workflow" },
      { kind: "dataset" },
      { keyword: "gpu" },
      { text: "facet-3" },
      { license: "MIT" },
      { kind: "workflow", keyword: "gpu" },
      { text: "seeded" },
      { namespace: "olcf" },
      { status: "active" },
      { kind: "dataset", license: "MIT" },
    ];
    expect(interactions.length).toBe(10);

    for (const interaction of interactions) {
      // reset, then apply this interaction through the UI controls
      window.location.hash = "#/discover";
      renderDiscovery(root, anonymous);
      await waitFor(() => root.querySelector(".result-count")?.textContent !== "no search yet");

      if (interaction.text) {
        const box = root.querySelector('input[type="search"]') as HTMLInputElement;
        box.value = String(interaction.text);
        const go = [...root.querySelectorAll("button")].find((b) => b.textContent === "Search")!;
        (go as HTMLButtonElement).click();
      }
      for (const [facet, label] of [
        ["kind", "Kind"],
        ["status", "Status"],
        ["keyword", "Keyword"],
        ["license", "License"],
        ["namespace", "Namespace"],
      ] as const) {
        if (interaction[facet]) {
          setField(root, label, String(interaction[facet]));
        }
      }
      const expected = await anonymous.search({
        q: (interaction.text as string) || undefined,
        kind: (interaction.kind as string) || undefined,
        keyword: (interaction.keyword as string) || undefined,
        license: (interaction.license as string) || undefined,
        status: (interaction.status as string) || undefined,
        namespace: (interaction.namespace as string) || undefined,
        limit: 20,
      });
      await waitFor(
        () =>
          root.querySelector(".result-count")?.textContent ===
          `${expected.total} result(s)`,
      );
      expect(root.querySelector(".result-count")!.textContent).toBe(
        `${expected.total} result(s)`,
      );
    }

    // copied-URL restoration: capture the URL, re-render fresh, same page
    window.location.hash = "#/discover";
    renderDiscovery(root, anonymous);
    await waitFor(() => root.querySelector(".result-count")?.textContent !== "no search yet");
    setField(root, "Kind", "dataset");
    await waitFor(() => window.location.hash.includes("kind=dataset"));
    const copied = window.location.hash;
    const before = await waitForResults(root);

    document.body.innerHTML = '<div id="fresh"></div>';
    window.location.hash = copied;
    const fresh = document.getElementById("fresh")!;
    renderDiscovery(fresh, anonymous);
    const after = await waitForResults(fresh);
    expect(after).toEqual(before);
  }, 120000);

  it("anonymous view of a listed record is a stub with no download control", async () => {
    const client = new GatewayClient(baseUrl);
    client.setToken(contributorToken);
    const listed = await client.register(
      {
        name: "under-wraps",
        description: "Listed-mode record whose existence is public, content private.",
        kind: "workflow",
        license: "proprietary",
        authors: [{ name: "Erin" }],
        keywords: [],
      },
      [{ scheme: "git", locator: "https://git.example.org/private/wraps" }],
      { visibility: "listed" },
    );

    document.body.innerHTML = '<div id="root"></div>';
    window.location.hash = `#/discover?selected=${encodeURIComponent(listed.pid)}`;
    const root = document.getElementById("root")!;
    renderDiscovery(root, new GatewayClient(baseUrl)); // anonymous
    await waitFor(() => root.querySelector(".stub-page") !== null);
    expect(root.querySelector(".stub-page")!.textContent).toContain(
      "artifact exists; access restricted",
    );
    expect(root.querySelector(".download-control")).toBeNull();
    // the owner sees the full record instead
    document.body.innerHTML = '<div id="owner"></div>';
    const ownerRoot = document.getElementById("owner")!;
    renderDiscovery(ownerRoot, client);
    await waitFor(() => ownerRoot.querySelector(".detail-panel h3") !== null);
    expect(ownerRoot.querySelector(".stub-page")).toBeNull();
  }, 60000);
});

async function waitForResults(root: HTMLElement): Promise<string[]> {
  await waitFor(() => {
    const count = root.querySelector(".result-count")?.textContent ?? "";
    return /^\d+ result\(s\)$/.test(count);
  });
  return [...root.querySelectorAll(".result-row")].map((row) => row.textContent ?? "");
}
