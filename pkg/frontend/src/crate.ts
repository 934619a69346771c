// Crate prefill: pull the wizard's draft fields out of an uploaded
// Workflow-RO-Crate zip, mirroring the registry's own import mapping so the
// preview matches the record the server will mint.

import { readZip } from "./zip.js";
import type { Author, MetadataDocument } from "./types.js";

interface Entity {
  "@id": string;
  "@type": string | string[];
  [key: string]: unknown;
}

function refId(value: unknown): string | null {
  if (typeof value === "string") return value;
  if (value && typeof value === "object" && "@id" in (value as Entity)) {
    return (value as Entity)["@id"];
  }
  return null;
}

function entityById(graph: Entity[], id: string | null): Entity | undefined {
  return id ? graph.find((e) => e["@id"] === id) : undefined;
}

export interface CratePrefill {
  document: Partial<MetadataDocument>;
  mainPath: string | null;
  attachmentCount: number;
}

export async function prefillFromCrate(archive: ArrayBuffer | Uint8Array): Promise<CratePrefill> {
  const entries = await readZip(archive);
  const metadata = entries.get("ro-crate-metadata.json");
  if (!metadata) throw new Error("archive carries no ro-crate-metadata.json");
  const jsonld = JSON.parse(new TextDecoder().decode(metadata));
  const graph: Entity[] = jsonld["@graph"] ?? [];

  const descriptor = entityById(graph, "ro-crate-metadata.json");
  const rootId = descriptor ? refId(descriptor["about"]) : "./";
  const root = entityById(graph, rootId ?? "./");
  if (!root) throw new Error("crate has no root entity");

  const authors: Author[] = [];
  const authorRefs = root["author"];
  for (const ref of Array.isArray(authorRefs) ? authorRefs : authorRefs ? [authorRefs] : []) {
    const person = entityById(graph, refId(ref));
    if (person) {
      const author: Author = { name: String(person["name"] ?? person["@id"]) };
      if (person["identifier"]) author.identifier = String(person["identifier"]);
      authors.push(author);
    }
  }

  const rawKeywords = root["keywords"];
  const keywords = Array.isArray(rawKeywords)
    ? rawKeywords.map(String)
    : typeof rawKeywords === "string"
      ? rawKeywords.split(",").map((k) => k.trim()).filter(Boolean)
      : [];

  const mainId = refId(root["mainEntity"]);
  const main = entityById(graph, mainId);
  const document: Partial<MetadataDocument> = {
    name: String(root["name"] ?? ""),
    description: String(root["description"] ?? ""),
    kind: "workflow",
    license: refId(root["license"]) ?? "",
    authors,
    keywords,
  };
  if (main) {
    const language = main["programmingLanguage"];
    const hint = typeof language === "string" ? language : refId(language);
    if (hint) document.programming_language = hint;
  }

  return {
    document,
    mainPath: mainId && entries.has(mainId) ? mainId : null,
    attachmentCount: entries.size - 1,
  };
}
