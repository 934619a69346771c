// Form-level replica of the server's document validation, so the wizard can
// gate navigation instantly. The server stays authoritative: submissions
// re-validate there and any rejection renders inline.

import type { MetadataDocument, ValidationIssue } from "./types.js";

const KINDS = ["workflow", "code", "container", "dataset", "model", "service"];
const PROPERTY_NAME = /^[a-z][a-z0-9_]*$/;
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

export function validateDraft(doc: Partial<MetadataDocument>): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  const error = (property: string, message: string) =>
    issues.push({ severity: "error", property, message });
  const warning = (property: string, message: string) =>
    issues.push({ severity: "warning", property, message });

  for (const prop of ["name", "description", "license"] as const) {
    const value = doc[prop];
    if (value == null || (typeof value === "string" && value.trim() === "")) {
      error(prop, `required property '${prop}' is missing or empty`);
    }
  }

  if (!doc.kind) {
    error("kind", "required property 'kind' is missing");
  } else if (!KINDS.includes(doc.kind)) {
    error("kind", `unknown component kind '${doc.kind}'`);
  }

  if (!Array.isArray(doc.authors) || doc.authors.length === 0) {
    error("authors", "authors must be a non-empty list");
  } else {
    doc.authors.forEach((author, i) => {
      if (!author || !author.name || author.name.trim() === "") {
        error("authors", `author #${i + 1} must carry a non-empty name`);
      }
    });
  }

  if (doc.keywords == null) {
    error("keywords", "required property 'keywords' is missing");
  } else if (!Array.isArray(doc.keywords) || doc.keywords.some((k) => typeof k !== "string")) {
    error("keywords", "keywords must be a list of strings");
  }

  for (const prop of Object.keys(doc)) {
    if (!PROPERTY_NAME.test(prop)) {
      error(prop, "property names must be lowercase snake_case");
    } else if (!KNOWN.has(prop) && !prop.startsWith("x_")) {
      warning(prop, `unknown property '${prop}' will be stored as 'x_${prop}'`);
    }
  }

  return issues;
}

export function hasErrors(issues: ValidationIssue[]): boolean {
  return issues.some((issue) => issue.severity === "error");
}
