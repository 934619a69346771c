// Guided registration wizard rendering. Pure DOM, one render per state
// change; every allow/deny the user sees comes back from the gateway.

import { GatewayClient, ApiError } from "../api.js";
import { prefillFromCrate } from "../crate.js";
import { reconcile } from "../fair.js";
import { Store } from "../store.js";
import type { FairReport, RecordView, SourceDraft } from "../types.js";
import {
  STEP_ORDER,
  StepId,
  WizardState,
  canAdvance,
  fairPreview,
  initialWizardState,
  issuesForStep,
  nextStep,
  previousStep,
  reviewCanonicalBytes,
  submissionPayload,
} from "./steps.js";

const STEP_TITLES: Record<StepId, string> = {
  basics: "Basics",
  sources: "Sources",
  "license-authors": "License & authors",
  "visibility-embargo": "Visibility & embargo",
  review: "Review & submit",
};

interface WizardOutcome {
  record: RecordView | null;
  report: FairReport | null;
  error: string | null;
  discrepancies: ReturnType<typeof reconcile>;
}

export function renderWizard(root: HTMLElement, client: GatewayClient): Store<WizardState> {
  const store = new Store<WizardState>(initialWizardState());
  const outcome: WizardOutcome = { record: null, report: null, error: null, discrepancies: [] };

  const container = el("div", "wizard");
  const nav = el("nav", "wizard-nav");
  const content = el("section", "wizard-content");
  const fairPanel = el("aside", "fair-panel");
  root.replaceChildren(container);
  container.append(nav, content, fairPanel);

  function sync(state: WizardState) {
    renderNav(state);
    renderStep(state);
    renderFairPanel(state);
  }

  function renderNav(state: WizardState) {
    nav.replaceChildren();
    STEP_ORDER.forEach((step, index) => {
      const button = el("button", "step-button") as HTMLButtonElement;
      button.textContent = `${index + 1}. ${STEP_TITLES[step]}`;
      const currentIndex = STEP_ORDER.indexOf(state.step);
      button.disabled = index > currentIndex;
      if (step === state.step) button.classList.add("active");
      button.addEventListener("click", () => {
        if (index <= currentIndex) store.set({ step });
      });
      nav.appendChild(button);
    });
  }

  function renderStep(state: WizardState) {
    content.replaceChildren();
    if (outcome.record) {
      renderSuccess(state);
      return;
    }
    const issues = issuesForStep(state, state.step);
    const heading = el("h2");
    heading.textContent = STEP_TITLES[state.step];
    content.appendChild(heading);

    if (outcome.error) {
      content.appendChild(banner(outcome.error, "error-banner"));
    }

    switch (state.step) {
      case "basics":
        renderBasics(state);
        break;
      case "sources":
        renderSources(state);
        break;
      case "license-authors":
        renderLicenseAuthors(state);
        break;
      case "visibility-embargo":
        renderVisibility(state);
        break;
      case "review":
        renderReview(state);
        break;
    }

    for (const issue of issues) {
      content.appendChild(banner(`${issue.property}: ${issue.message}`,
        issue.severity === "error" ? "inline-error" : "inline-warning"));
    }

    const controls = el("div", "wizard-controls");
    const back = el("button") as HTMLButtonElement;
    back.textContent = "Back";
    back.disabled = previousStep(state) === null;
    back.addEventListener("click", () => {
      const step = previousStep(store.get());
      if (step) store.set({ step });
    });
    controls.appendChild(back);

    if (state.step !== "review") {
      const forward = el("button", "primary") as HTMLButtonElement;
      forward.textContent = "Next";
      forward.disabled = !canAdvance(state);
      forward.addEventListener("click", () => {
        const step = nextStep(store.get());
        if (step) store.set({ step });
      });
      controls.appendChild(forward);
    } else {
      const submit = el("button", "primary") as HTMLButtonElement;
      submit.textContent = "Register component";
      submit.disabled = !client.hasToken() || !canAdvance(state);
      submit.addEventListener("click", () => void doSubmit());
      controls.appendChild(submit);
      if (!client.hasToken()) {
        controls.appendChild(banner("sign in with a token to submit", "inline-warning"));
      }
    }
    content.appendChild(controls);
  }

  function renderBasics(state: WizardState) {
    content.appendChild(
      textField("Name", state.draft.name ?? "", (value) =>
        store.set({ draft: { ...store.get().draft, name: value } })),
    );
    content.appendChild(
      textArea("Description", state.draft.description ?? "", (value) =>
        store.set({ draft: { ...store.get().draft, description: value } })),
    );
    content.appendChild(
      selectField("Kind", state.draft.kind ?? "workflow",
        ["workflow", "code", "container", "dataset", "model", "service"],
        (value) => store.set({ draft: { ...store.get().draft, kind: value as never } })),
    );
    content.appendChild(
      textField("Keywords (comma separated)", (state.draft.keywords ?? []).join(", "),
        (value) => store.set({
          draft: {
            ...store.get().draft,
            keywords: value.split(",").map((k) => k.trim()).filter(Boolean),
          },
        })),
    );

    const upload = el("div", "field");
    const label = el("label");
    label.textContent = "Or upload a Workflow-RO-Crate zip to prefill";
    const input = el("input") as HTMLInputElement;
    input.type = "file";
    input.accept = ".zip,.crate.zip";
    input.addEventListener("change", () => {
      const file = input.files?.[0];
      if (file) void prefill(file);
    });
    upload.append(label, input);
    content.appendChild(upload);
  }

  async function prefill(file: File) {
    try {
      const bytes = new Uint8Array(await file.arrayBuffer());
      const { document } = await prefillFromCrate(bytes);
      store.set({
        draft: { ...store.get().draft, ...document },
        crateUpload: bytes,
      });
    } catch (err) {
      outcome.error = `crate upload failed: ${String(err)}`;
      store.set({});
    }
  }

  function renderSources(state: WizardState) {
    if (state.crateUpload) {
      content.appendChild(banner(
        "a crate upload is staged; its attachments become the record's sources",
        "inline-note"));
    }
    state.sources.forEach((source, index) => {
      const row = el("div", "source-row");
      row.appendChild(selectField("Scheme", source.scheme,
        ["git", "oci", "https", "file", "doi"],
        (value) => updateSource(index, { scheme: value as SourceDraft["scheme"] })));
      row.appendChild(textField("Locator", source.locator,
        (value) => updateSource(index, { locator: value })));
      row.appendChild(textField("Ref (tag/commit/digest)", source.ref ?? "",
        (value) => updateSource(index, { ref: value || undefined })));
      const remove = el("button") as HTMLButtonElement;
      remove.textContent = "Remove";
      remove.addEventListener("click", () => {
        const sources = store.get().sources.slice();
        sources.splice(index, 1);
        store.set({ sources });
      });
      row.appendChild(remove);
      content.appendChild(row);
    });
    const add = el("button") as HTMLButtonElement;
    add.textContent = "Add source";
    add.addEventListener("click", () =>
      store.set({
        sources: [...store.get().sources, { scheme: "git", locator: "" }],
      }));
    content.appendChild(add);
  }

  function updateSource(index: number, patch: Partial<SourceDraft>) {
    const sources = store.get().sources.slice();
    sources[index] = { ...sources[index], ...patch };
    store.set({ sources });
  }

  function renderLicenseAuthors(state: WizardState) {
    content.appendChild(
      textField("License (SPDX id or 'proprietary')", state.draft.license ?? "",
        (value) => store.set({ draft: { ...store.get().draft, license: value } })),
    );
    (state.draft.authors ?? []).forEach((author, index) => {
      const row = el("div", "source-row");
      row.appendChild(textField("Author name", author.name, (value) => {
        const authors = (store.get().draft.authors ?? []).slice();
        authors[index] = { ...authors[index], name: value };
        store.set({ draft: { ...store.get().draft, authors } });
      }));
      row.appendChild(textField("Identifier (ORCID, optional)", author.identifier ?? "",
        (value) => {
          const authors = (store.get().draft.authors ?? []).slice();
          authors[index] = { ...authors[index] };
          if (value) authors[index].identifier = value;
          else delete authors[index].identifier;
          store.set({ draft: { ...store.get().draft, authors } });
        }));
      content.appendChild(row);
    });
    const add = el("button") as HTMLButtonElement;
    add.textContent = "Add author";
    add.addEventListener("click", () =>
      store.set({
        draft: {
          ...store.get().draft,
          authors: [...(store.get().draft.authors ?? []), { name: "" }],
        },
      }));
    content.appendChild(add);
  }

  function renderVisibility(state: WizardState) {
    content.appendChild(selectField("Visibility", state.policy.visibility,
      ["public", "listed", "hidden"],
      (value) => store.set({
        policy: { ...store.get().policy, visibility: value as never },
      })));
    content.appendChild(textField("Enclave (defaults to your first membership)",
      state.policy.enclave ?? "",
      (value) => store.set({
        policy: { ...store.get().policy, enclave: value || undefined },
      })));
    content.appendChild(textField("Embargo until (ISO UTC, optional)",
      state.policy.embargo_until ?? "",
      (value) => store.set({
        policy: { ...store.get().policy, embargo_until: value || undefined },
      })));
  }

  function renderReview(state: WizardState) {
    const note = el("p");
    note.textContent = "This is byte-for-byte the canonical document the registry will store:";
    content.appendChild(note);
    const pre = el("pre", "review-bytes");
    pre.textContent = reviewCanonicalBytes(state);
    content.appendChild(pre);
  }

  function renderSuccess(state: WizardState) {
    const record = outcome.record!;
    const heading = el("h2");
    heading.textContent = "Component registered";
    content.replaceChildren(heading);
    const pidLine = el("p", "pid-line");
    pidLine.textContent = record.pid;
    content.appendChild(pidLine);
    if (outcome.report) {
      const badge = el("p");
      badge.innerHTML = `FAIR score <strong>${outcome.report.score}/12</strong> — ` +
        `<span class="badge badge-${outcome.report.badge}">${outcome.report.badge}</span>`;
      content.appendChild(badge);
    }
    for (const diff of outcome.discrepancies) {
      content.appendChild(banner(
        `preview disagreed with the registry on ${diff.id}: ` +
          `previewed ${diff.previewed}, server says ${diff.reported}`,
        "inline-warning"));
    }
    const link = el("a") as HTMLAnchorElement;
    link.href = `#/discover?selected=${encodeURIComponent(record.pid)}`;
    link.textContent = "Open in discovery";
    content.appendChild(link);
  }

  async function doSubmit() {
    const state = store.get();
    outcome.error = null;
    try {
      const preview = fairPreview(state);
      let record: RecordView;
      if (state.crateUpload) {
        record = await client.importCrate(state.crateUpload, state.policy);
      } else {
        const payload = submissionPayload(state);
        record = await client.register(payload.document, payload.sources, payload.policy);
      }
      outcome.record = record;
      outcome.report = await client.assess(record.pid);
      outcome.discrepancies = reconcile(preview.checks, outcome.report.checks);
    } catch (err) {
      outcome.error = err instanceof ApiError
        ? `${err.message}${err.reason ? ` (${err.reason})` : ""}`
        : String(err);
    }
    store.set({});
  }

  function renderFairPanel(state: WizardState) {
    const { checks, score, badge } = fairPreview(state);
    fairPanel.replaceChildren();
    const heading = el("h3");
    heading.textContent = `FAIR preview: ${score}/12`;
    fairPanel.appendChild(heading);
    const badgeSpan = el("span", `badge badge-${badge}`);
    badgeSpan.textContent = badge;
    fairPanel.appendChild(badgeSpan);
    const list = el("ul", "check-list");
    for (const check of checks) {
      const item = el("li", `check check-${check.result}`);
      item.textContent = `${check.id}: ${check.result}`;
      item.title = check.evidence;
      list.appendChild(item);
    }
    fairPanel.appendChild(list);
  }

  store.subscribe(sync);
  return store;
}

function el(tag: string, className = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}

function banner(text: string, className: string): HTMLElement {
  const node = el("div", className);
  node.textContent = text;
  return node;
}

function textField(label: string, value: string, onInput: (value: string) => void): HTMLElement {
  const field = el("div", "field");
  const labelNode = el("label");
  labelNode.textContent = label;
  const input = el("input") as HTMLInputElement;
  input.type = "text";
  input.value = value;
  input.addEventListener("input", () => onInput(input.value));
  field.append(labelNode, input);
  return field;
}

function textArea(label: string, value: string, onInput: (value: string) => void): HTMLElement {
  const field = el("div", "field");
  const labelNode = el("label");
  labelNode.textContent = label;
  const input = el("textarea") as HTMLTextAreaElement;
  input.value = value;
  input.rows = 4;
  input.addEventListener("input", () => onInput(input.value));
  field.append(labelNode, input);
  return field;
}

function selectField(
  label: string,
  value: string,
  options: string[],
  onChange: (value: string) => void,
): HTMLElement {
  const field = el("div", "field");
  const labelNode = el("label");
  labelNode.textContent = label;
  const select = el("select") as HTMLSelectElement;
  for (const option of options) {
    const node = el("option") as HTMLOptionElement;
    node.value = option;
    node.textContent = option;
    if (option === value) node.selected = true;
    select.appendChild(node);
  }
  select.addEventListener("change", () => onChange(select.value));
  field.append(labelNode, select);
  return field;
}
