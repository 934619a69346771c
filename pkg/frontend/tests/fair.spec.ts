// The live FAIR preview must agree with the server rubric wherever the draft
// carries enough information; the fixtures hold server-computed reports.

import { describe, expect, it } from "vitest";
import { badgeForScore, previewChecks, previewScore, reconcile, CHECK_IDS } from "../src/fair.js";
import type { SourceDraft } from "../src/types.js";
import cases from "./fixtures/cases.json";

describe("FAIR preview replica", () => {
  for (const fixture of cases.fair) {
    it(`agrees with the server report for ${fixture.pid}`, () => {
      const checks = previewChecks({
        document: fixture.document,
        sources: fixture.sources as SourceDraft[],
      });
      expect(checks.map((c) => c.id)).toEqual([...CHECK_IDS]);
      const results = Object.fromEntries(checks.map((c) => [c.id, c.result]));
      expect(results).toEqual(fixture.results);
      expect(previewScore(checks)).toBe(fixture.score);
      expect(badgeForScore(previewScore(checks))).toBe(fixture.badge);
    });
  }

  it("thresholds badges exactly", () => {
    expect(badgeForScore(12)).toBe("gold");
    expect(badgeForScore(11)).toBe("silver");
    expect(badgeForScore(9)).toBe("silver");
    expect(badgeForScore(8)).toBe("bronze");
    expect(badgeForScore(6)).toBe("bronze");
    expect(badgeForScore(5)).toBe("none");
  });

  it("flags a missing license as R1_1 fail in the preview", () => {
    const checks = previewChecks({
      document: { name: "x", description: "d", kind: "code", authors: [{ name: "a" }], keywords: [] },
      sources: [{ scheme: "git", locator: "https://x" }],
    });
    const r11 = checks.find((c) => c.id === "R1_1")!;
    expect(r11.result).toBe("fail");
  });

  it("reports discrepancies between preview and server", () => {
    const preview = previewChecks({
      document: cases.fair[0].document,
      sources: cases.fair[0].sources as SourceDraft[],
    });
    const serverChecks = preview.map((c) =>
      c.id === "F4" ? { ...c, result: "fail" as const } : c,
    );
    const diffs = reconcile(preview, serverChecks);
    expect(diffs).toEqual([{ id: "F4", previewed: "pass", reported: "fail" }]);
  });
});
