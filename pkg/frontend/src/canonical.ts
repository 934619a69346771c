// Client-side replica of the registry's canonical document rendering:
// key-sorted, whitespace-free JSON over the normalized document (unknown
// properties renamed under x_, strings NFC-composed). Byte equality with
// the server is what the review step promises, so this must match exactly.

const KNOWN_PROPERTIES = new Set([
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

type Json = string | number | boolean | null | Json[] | { [key: string]: Json };

function normalizeValue(value: Json): Json {
  if (typeof value === "string") return value.normalize("NFC");
  if (Array.isArray(value)) return value.map(normalizeValue);
  if (value !== null && typeof value === "object") {
    const out: { [key: string]: Json } = {};
    for (const [key, inner] of Object.entries(value)) {
      out[key.normalize("NFC")] = normalizeValue(inner as Json);
    }
    return out;
  }
  return value;
}

export function normalizeDocument(doc: Record<string, unknown>): Record<string, Json> {
  const normalized: Record<string, Json> = {};
  for (const [rawKey, rawValue] of Object.entries(doc)) {
    if (rawValue === undefined) continue;
    let key = rawKey;
    if (!KNOWN_PROPERTIES.has(key) && !key.startsWith("x_")) {
      key = `x_${key}`;
    }
    normalized[key] = normalizeValue(rawValue as Json);
  }
  return normalized;
}

function renderSorted(value: Json): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(renderSorted).join(",")}]`;
  }
  const keys = Object.keys(value).sort();
  const parts = keys.map((key) => `${JSON.stringify(key)}:${renderSorted(value[key])}`);
  return `{${parts.join(",")}}`;
}

export function canonicalDocument(doc: Record<string, unknown>): string {
  return renderSorted(normalizeDocument(doc));
}
