// End-to-end: the real client code drives a full game against the real
// Python server (stub dialogue voice, synthetic sensing at infinite
// speedup), in a headless DOM with a real WebSocket.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { loadGallery } from "../src/gallery.js";
import { App } from "../src/main.js";
import type { WebSocketCtor } from "../src/socket.js";

const PORT = 8941;
const BASE = `http://127.0.0.1:${PORT}`;

let tmp: string;
let server: ChildProcess | null = null;

async function healthy(): Promise<boolean> {
  try {
    const response = await fetch(`${BASE}/api/health`);
    return response.ok;
  } catch {
    return false;
  }
}

beforeAll(async () => {
  tmp = mkdtempSync(join(tmpdir(), "genjiko-e2e-"));
  execFileSync("genjiko", [
    "dataset", "--out", join(tmp, "data"), "--train", "1", "--test", "0",
    "--duration", "30", "--seed", "5",
  ]);
  execFileSync("genjiko", [
    "train", "--kind", "centroid", "--window", "50x25",
    "--manifest", join(tmp, "data", "manifest.json"),
    "--out", join(tmp, "model.gnji"),
  ]);
  const config = {
    port: PORT,
    data_dir: join(tmp, "gamedata"),
    model_path: join(tmp, "model.gnji"),
    sensing_speedup: 1e9,
    sensing_duration_s: 30,
    sequences: { demo: [0, 0, 1, 0, 1] },
  };
  writeFileSync(join(tmp, "config.json"), JSON.stringify(config));
  server = spawn("genjiko", ["serve", "--config", join(tmp, "config.json")], {
    stdio: "ignore",
  });
  await vi.waitFor(async () => {
    expect(await healthy()).toBe(true);
  }, { timeout: 60_000, interval: 500 });
});

afterAll(() => {
  server?.kill();
});

function click(root: HTMLElement, selector: string): void {
  const node = root.querySelector<HTMLElement>(selector);
  if (!node) throw new Error(`no element for ${selector}`);
  node.click();
}

async function waitForText(root: HTMLElement, selector: string, text: string) {
  await vi.waitFor(() => {
    const node = root.querySelector(selector);
    expect(node?.textContent ?? "").toContain(text);
  }, { timeout: 15_000, interval: 25 });
}

async function waitForPhase(root: HTMLElement, phase: string) {
  await vi.waitFor(() => {
    expect(root.querySelector(".app")?.getAttribute("data-phase")).toBe(phase);
  }, { timeout: 15_000, interval: 25 });
}

describe("full game in a headless browser DOM", () => {
  it("ends on the reveal screen with correct diagrams and bookmark", async () => {
    const tokenResponse = await fetch(`${BASE}/api/tokens`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sequence_id: "demo" }),
    });
    const token = ((await tokenResponse.json()) as { token: string }).token;

    const root = document.createElement("div");
    document.body.appendChild(root);
    const app = new App(root, { baseUrl: BASE, wsCtor: WebSocket as unknown as WebSocketCtor });
    const sessionId = await app.join(token);

    await waitForPhase(root, "briefing");
    await waitForText(root, ".partner-text", "Five scents");
    click(root, '[data-action="start_calibration"]');
    for (let sample = 1; sample <= 5; sample++) {
      await waitForText(root, "h1", `Calibration ${sample} of 5`);
      expect(root.querySelector(".breathing-ring .ring")).toBeTruthy();
      click(root, '[data-action="calibration_next"]');
    }

    // round 1: smell, no judgment; the partner speaks and round 2 opens
    await waitForText(root, "h1", "Round 1");
    click(root, '[data-action="done_smelling"]');
    await waitForText(root, "h1", "Round 2");

    const plays: Array<{ propose: string; revise?: string }> = [
      { propose: "1" },
      { propose: "1", revise: "new" }, // second thoughts on round 3
      { propose: "2" },
      { propose: "3" },
    ];
    for (const [index, play] of plays.entries()) {
      const round = index + 2;
      await waitForText(root, "h1", `Round ${round}`);
      await waitForPhase(root, "round_smelling");
      click(root, '[data-action="done_smelling"]');
      await waitForPhase(root, "round_judgment");
      click(root, `[data-action="propose_judgment"][data-judgment="${play.propose}"]`);
      await waitForPhase(root, "round_dialogue");
      expect(root.querySelector(".partner-text")?.textContent).toBeTruthy();
      if (play.revise) {
        click(root, `[data-action="revise_judgment"][data-judgment="${play.revise}"]`);
        await waitForText(root, ".hint", "something new");
      }
      click(root, '[data-action="confirm_judgment"]');
    }

    await waitForPhase(root, "reveal");
    click(root, '[data-action="acknowledge_reveal"]');
    await waitForPhase(root, "debrief");

    // side-by-side diagrams, both showing the exact pattern 00101
    const figures = root.querySelectorAll(".side-by-side .pattern");
    expect(figures.length).toBe(2);
    expect(figures[0]!.querySelectorAll("svg line").length).toBeGreaterThan(5);
    expect(figures[0]!.textContent).toContain("00101");
    expect(figures[1]!.textContent).toContain("00101");
    expect(root.querySelector(".score")?.textContent).toContain("exact match");
    expect(root.querySelectorAll(".pairs .pair.agree").length).toBe(10);

    // the bookmark link downloads exactly what the API serves
    const link = root.querySelector<HTMLAnchorElement>("a.bookmark");
    expect(link).toBeTruthy();
    expect(link!.getAttribute("download")).toBeTruthy();
    const viaLink = await (await fetch(link!.href)).text();
    const direct = await (
      await fetch(`${BASE}/api/sessions/${sessionId}/bookmark.svg`)
    ).text();
    expect(viaLink).toBe(direct);
    expect(viaLink.startsWith("<svg")).toBe(true);

    // the server log recorded the revision before round 3's confirmation
    const logDir = join(tmp, "gamedata", "sessions");
    const logFile = readdirSync(logDir).find((f) => f.startsWith(sessionId));
    const kinds = readFileSync(join(logDir, logFile!), "utf-8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line) as { kind: string; payload: { round?: number } });
    const revisedAt = kinds.findIndex((e) => e.kind === "judgment_revised");
    const confirmedRound3 = kinds.findIndex(
      (e) => e.kind === "judgment_confirmed" && e.payload.round === 3,
    );
    expect(revisedAt).toBeGreaterThan(-1);
    expect(confirmedRound3).toBeGreaterThan(revisedAt);

    app.close();
  }, 120_000);

  it("renders all 52 server patterns in the gallery without failures", async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const result = await loadGallery(root, new ApiClient(BASE));
    expect(result.total).toBe(52);
    expect(result.rendered).toBe(52);
    expect(result.outOfBounds).toEqual([]);
    expect(root.querySelectorAll(".gallery .pattern").length).toBe(52);
    const captions = [...root.querySelectorAll("figcaption")].map((c) => c.textContent);
    expect(new Set(captions).size).toBe(52);
  }, 60_000);
});
