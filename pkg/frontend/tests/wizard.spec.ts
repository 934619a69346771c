// Wizard behavior in a DOM: gated navigation, inline errors, and the
// review-step promise that preview bytes equal the submitted document.

import { beforeEach, describe, expect, it } from "vitest";
import { canonicalDocument } from "../src/canonical.js";
import {
  allIssues,
  canAdvance,
  fairPreview,
  initialWizardState,
  nextStep,
  reviewCanonicalBytes,
  stepBlocked,
  submissionPayload,
  WizardState,
} from "../src/wizard/steps.js";
import { renderWizard } from "../src/wizard/view.js";
import { GatewayClient } from "../src/api.js";

function filledState(): WizardState {
  const state = initialWizardState();
  state.draft = {
    name: "align-reads",
    description: "Aligns sequencing reads against a reference genome at scale.",
    kind: "workflow",
    license: "Apache-2.0",
    authors: [{ name: "Alice" }],
    keywords: ["alignment", "genomics"],
  };
  state.sources = [{ scheme: "git", locator: "https://git.example.org/lab/align", ref: "v1" }];
  return state;
}

describe("wizard state machine", () => {
  it("blocks forward navigation while the current step has errors", () => {
    const state = initialWizardState();
    expect(stepBlocked(state, "basics")).toBe(true);
    expect(nextStep(state)).toBeNull();

    state.draft.name = "thing";
    state.draft.description = "long enough to describe the thing";
    expect(stepBlocked(state, "basics")).toBe(false);
    expect(nextStep(state)).toBe("sources");
  });

  it("scopes issues to their owning step", () => {
    const state = filledState();
    state.draft.license = "";
    expect(stepBlocked(state, "basics")).toBe(false);
    expect(stepBlocked(state, "license-authors")).toBe(true);
    const preview = fairPreview(state);
    const r11 = preview.checks.find((c) => c.id === "R1_1")!;
    expect(r11.result).toBe("fail");
  });

  it("requires at least one source unless a crate upload is staged", () => {
    const state = filledState();
    state.sources = [];
    expect(stepBlocked(state, "sources")).toBe(true);
    state.crateUpload = new Uint8Array([1, 2, 3]);
    expect(stepBlocked(state, "sources")).toBe(false);
  });

  it("review bytes equal the submission document byte for byte", () => {
    const state = filledState();
    state.draft.cite_as = "";
    state.draft.x_extra = "kept";
    const payload = submissionPayload(state);
    expect(reviewCanonicalBytes(state)).toBe(canonicalDocument(payload.document));
    // empty-valued optional fields never sneak into the submission
    expect("cite_as" in payload.document).toBe(false);
  });

  it("validates embargo timestamps", () => {
    const state = filledState();
    state.policy.embargo_until = "tomorrow";
    expect(allIssues(state).some((i) => i.property === "embargo_until")).toBe(true);
    state.policy.embargo_until = "2027-01-01T00:00:00Z";
    expect(allIssues(state).some((i) => i.property === "embargo_until")).toBe(false);
  });
});

describe("wizard rendering", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="root"></div>';
    root = document.getElementById("root")!;
  });

  it("renders the five steps and starts on basics", () => {
    renderWizard(root, new GatewayClient("http://unused.invalid"));
    const buttons = [...root.querySelectorAll(".step-button")];
    expect(buttons.map((b) => b.textContent)).toEqual([
      "1. Basics",
      "2. Sources",
      "3. License & authors",
      "4. Visibility & embargo",
      "5. Review & submit",
    ]);
    expect(root.querySelector(".step-button.active")!.textContent).toContain("Basics");
    // future steps are not clickable
    expect((buttons[3] as HTMLButtonElement).disabled).toBe(true);
  });

  it("disables Next until the step is error-free and renders inline issues", () => {
    const store = renderWizard(root, new GatewayClient("http://unused.invalid"));
    const next = [...root.querySelectorAll("button")].find(
      (b) => b.textContent === "Next",
    ) as HTMLButtonElement;
    expect(next.disabled).toBe(true);
    expect(root.querySelectorAll(".inline-error").length).toBeGreaterThan(0);

    store.set({
      draft: {
        ...store.get().draft,
        name: "align-reads",
        description: "A good description of the workflow component.",
      },
    });
    const enabledNext = [...root.querySelectorAll("button")].find(
      (b) => b.textContent === "Next",
    ) as HTMLButtonElement;
    expect(enabledNext.disabled).toBe(false);
  });

  it("shows the exact canonical bytes on the review step", () => {
    const store = renderWizard(root, new GatewayClient("http://unused.invalid"));
    const filled = filledState();
    store.set({ ...filled, step: "review" });
    const pre = root.querySelector(".review-bytes")!;
    expect(pre.textContent).toBe(canonicalDocument(submissionPayload(filled).document));
  });

  it("updates the FAIR preview live as fields are filled", () => {
    const store = renderWizard(root, new GatewayClient("http://unused.invalid"));
    const scoreOf = () =>
      parseInt(root.querySelector(".fair-panel h3")!.textContent!.match(/(\d+)\/12/)![1], 10);
    const before = scoreOf();
    store.set({
      draft: {
        ...store.get().draft,
        name: "align-reads",
        description: "Aligns sequencing reads against a reference genome at scale.",
        license: "MIT",
      },
      sources: [{ scheme: "git", locator: "https://git.example.org/x" }],
    });
    expect(scoreOf()).toBeGreaterThan(before);
  });
});
