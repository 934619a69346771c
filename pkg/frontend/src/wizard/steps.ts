// Wizard state machine: five steps, forward navigation gated on the current
// step's error-severity issues, and a review step that shows exactly the
// document the submission will carry.

import { canonicalDocument } from "../canonical.js";
import { previewChecks, previewScore, badgeForScore } from "../fair.js";
import { hasErrors, validateDraft } from "../validate.js";
import type {
  FairCheck,
  MetadataDocument,
  PolicyDraft,
  SourceDraft,
  ValidationIssue,
} from "../types.js";

export const STEP_ORDER = [
  "basics",
  "sources",
  "license-authors",
  "visibility-embargo",
  "review",
] as const;

export type StepId = (typeof STEP_ORDER)[number];

export interface WizardState {
  step: StepId;
  draft: Partial<MetadataDocument>;
  sources: SourceDraft[];
  policy: PolicyDraft;
  crateUpload: Uint8Array | null;
  issues: ValidationIssue[];
}

export function initialWizardState(): WizardState {
  return {
    step: "basics",
    draft: { kind: "workflow", keywords: [], authors: [] },
    sources: [],
    policy: { visibility: "public" },
    crateUpload: null,
    issues: [],
  };
}

// Which validation issues belong to which step, for inline rendering.
const STEP_PROPERTIES: Record<StepId, string[]> = {
  basics: ["name", "description", "kind", "keywords"],
  sources: ["sources"],
  "license-authors": ["license", "authors"],
  "visibility-embargo": ["visibility", "embargo_until", "enclave"],
  review: [],
};

export function issuesForStep(state: WizardState, step: StepId): ValidationIssue[] {
  const scoped = STEP_PROPERTIES[step];
  return allIssues(state).filter((issue) => scoped.includes(issue.property));
}

export function allIssues(state: WizardState): ValidationIssue[] {
  const issues = validateDraft(state.draft);
  if (state.sources.length === 0 && state.crateUpload === null) {
    issues.push({
      severity: "error",
      property: "sources",
      message: "at least one artifact source (or a crate upload) is required",
    });
  }
  for (const [i, source] of state.sources.entries()) {
    if (!source.locator || source.locator.trim() === "") {
      issues.push({
        severity: "error",
        property: "sources",
        message: `source #${i + 1} has no locator`,
      });
    }
  }
  if (state.policy.embargo_until) {
    if (!/^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/.test(state.policy.embargo_until)) {
      issues.push({
        severity: "error",
        property: "embargo_until",
        message: "embargo must be an ISO UTC timestamp like 2027-01-01T00:00:00Z",
      });
    }
  }
  return issues;
}

export function stepBlocked(state: WizardState, step: StepId): boolean {
  return issuesForStep(state, step).some((issue) => issue.severity === "error");
}

export function canAdvance(state: WizardState): boolean {
  return !stepBlocked(state, state.step);
}

export function nextStep(state: WizardState): StepId | null {
  if (!canAdvance(state)) return null;
  const index = STEP_ORDER.indexOf(state.step);
  return index < STEP_ORDER.length - 1 ? STEP_ORDER[index + 1] : null;
}

export function previousStep(state: WizardState): StepId | null {
  const index = STEP_ORDER.indexOf(state.step);
  return index > 0 ? STEP_ORDER[index - 1] : null;
}

/** The exact document register() will submit; the review step renders this. */
export function submissionDocument(state: WizardState): MetadataDocument {
  const doc: Record<string, unknown> = {};
  for (const [key, value] of Object.entries(state.draft)) {
    if (value === undefined || value === null) continue;
    if (typeof value === "string" && value === "") continue;
    if (Array.isArray(value) && value.length === 0 && key !== "keywords") continue;
    doc[key] = value;
  }
  if (!("keywords" in doc)) doc["keywords"] = [];
  return doc as MetadataDocument;
}

export function reviewCanonicalBytes(state: WizardState): string {
  return canonicalDocument(submissionDocument(state));
}

export interface FairPreview {
  checks: FairCheck[];
  score: number;
  badge: string;
}

export function fairPreview(state: WizardState): FairPreview {
  const checks = previewChecks({
    document: submissionDocument(state),
    sources: state.sources,
  });
  const score = previewScore(checks);
  return { checks, score, badge: badgeForScore(score) };
}

export function submissionPayload(state: WizardState): {
  document: MetadataDocument;
  sources: SourceDraft[];
  policy: PolicyDraft;
} {
  const policy: PolicyDraft = { visibility: state.policy.visibility };
  if (state.policy.enclave) policy.enclave = state.policy.enclave;
  if (state.policy.embargo_until) policy.embargo_until = state.policy.embargo_until;
  return { document: submissionDocument(state), sources: state.sources, policy };
}
