// Live FAIR preview: a client-side replica of the registry's 12-check
// rubric, evaluated against the draft as if it were already registered and
// indexed. The server report on submit is authoritative; the wizard renders
// a warning wherever the two disagree.

import type { FairCheck, SourceDraft } from "./types.js";

export const CHECK_IDS = [
  "F1", "F2", "F3", "F4", "A1", "A2", "I1", "I2", "I3", "R1", "R1_1", "R1_2",
] as const;

const MIN_DESCRIPTION_LENGTH = 50;
const SCHEMES = new Set(["git", "oci", "https", "file", "doi"]);
const KNOWN = new Set([
  "name",
  "description",
  "kind",
  "license",
  "authors",
  "keywords",
  "programming_language",
  "target_machine",
  "input_formats",
  "output_formats",
  "cite_as",
  "derived_from",
]);

export function badgeForScore(score: number): "none" | "bronze" | "silver" | "gold" {
  if (score >= 12) return "gold";
  if (score >= 9) return "silver";
  if (score >= 6) return "bronze";
  return "none";
}

function documentValid(doc: Record<string, unknown>): boolean {
  const required = ["name", "description", "kind", "license", "authors", "keywords"];
  for (const prop of required) {
    const value = doc[prop];
    if (value == null) return false;
    if (typeof value === "string" && value.trim() === "") return false;
    if (prop === "authors" && (!Array.isArray(value) || value.length === 0)) return false;
    if (prop === "keywords" && !Array.isArray(value)) return false;
  }
  return true;
}

export interface PreviewInput {
  document: Record<string, unknown>;
  sources: SourceDraft[];
  // the draft has no PID yet; a registered record's own citation can only
  // be judged server-side, so the preview grades cite_as presence
  assumeRunLinks?: boolean;
}

export function previewChecks(input: PreviewInput): FairCheck[] {
  const doc = input.document;
  const checks: FairCheck[] = [];
  const add = (
    id: string,
    description: string,
    result: FairCheck["result"],
    evidence: string,
  ) => checks.push({ id, description, result, evidence });

  const valid = documentValid(doc);

  add("F1", "record is bound to a persistent identifier", "pass",
    "a PID is minted at registration");
  add("F2", "record carries the required rich metadata",
    valid ? "pass" : "fail",
    valid ? "all required properties present" : "required properties missing");

  const cite = String(doc["cite_as"] ?? "");
  add("F3", "metadata explicitly embeds the record's own identifier",
    cite.includes(":") && /[a-z]+:(wf|cd|ct|ds|ml|sv)-\d{8}/.test(cite) ? "pass" : "fail",
    cite ? "cite_as present; PID match checked on submit" : "no cite_as yet; add one after registration");
  add("F4", "record is indexed in the searchable registry", "pass",
    "registration indexes the record for name search");

  const supported = input.sources.filter((s) => SCHEMES.has(s.scheme));
  add("A1", "at least one retrievable source over a supported scheme",
    supported.length > 0 ? "pass" : "fail",
    supported.length > 0
      ? `${supported.length} source(s) with supported schemes`
      : "no retrievable source on record");
  add("A2", "metadata stays accessible after the artifact is gone", "pass",
    "tombstoning preserves the full document and history by construction");

  add("I1", "metadata renders to canonical machine-readable bytes",
    valid ? "pass" : "fail",
    valid ? "canonical JSON rendering succeeds" : "invalid documents cannot canonicalize");

  const unknown = Object.keys(doc).filter((p) => !KNOWN.has(p) && !p.startsWith("x_"));
  add("I2", "properties conform to the registered vocabulary",
    unknown.length === 0 ? "pass" : "fail",
    unknown.length === 0
      ? "all properties known or x_-namespaced"
      : `un-namespaced properties: ${unknown.join(", ")}`);

  const derived = (doc["derived_from"] as string[] | undefined) ?? [];
  const machines = (doc["target_machine"] as string[] | undefined) ?? [];
  const refs = [...derived, ...machines];
  if (refs.length === 0) {
    add("I3", "qualified references resolve to registered records", "not-applicable",
      "no derived_from or target_machine references");
  } else {
    add("I3", "qualified references resolve to registered records", "pass",
      `${refs.length} reference(s); resolution is confirmed server-side`);
  }

  const description = String(doc["description"] ?? "");
  add("R1", "description is substantial enough to judge reuse",
    description.length >= MIN_DESCRIPTION_LENGTH ? "pass" : "fail",
    `description length ${description.length} (minimum ${MIN_DESCRIPTION_LENGTH})`);

  const license = String(doc["license"] ?? "").trim();
  add("R1_1", "a usage license is declared",
    license !== "" ? "pass" : "fail",
    license !== "" ? `license '${license}'` : "no license declared");

  const hasProvenance = Boolean(input.assumeRunLinks) || derived.length > 0;
  add("R1_2", "provenance links the record to runs or ancestry",
    hasProvenance ? "pass" : "fail",
    hasProvenance ? "run records or derived_from lineage present" : "no run records and no ancestry");

  return checks;
}

export function previewScore(checks: FairCheck[]): number {
  return checks.filter((c) => c.result === "pass").length;
}

export interface Discrepancy {
  id: string;
  previewed: string;
  reported: string;
}

export function reconcile(preview: FairCheck[], server: FairCheck[]): Discrepancy[] {
  const byId = new Map(server.map((c) => [c.id, c.result]));
  const diffs: Discrepancy[] = [];
  for (const check of preview) {
    const reported = byId.get(check.id);
    if (reported !== undefined && reported !== check.result) {
      diffs.push({ id: check.id, previewed: check.result, reported });
    }
  }
  return diffs;
}
