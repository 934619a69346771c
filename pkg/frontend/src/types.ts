// Gateway API shapes the console consumes. These mirror the JSON the
// service emits; the UI holds no policy logic of its own.

export type ComponentKind =
  | "workflow"
  | "code"
  | "container"
  | "dataset"
  | "model"
  | "service";

export interface Author {
  name: string;
  identifier?: string;
}

export interface MetadataDocument {
  name: string;
  description: string;
  kind: ComponentKind;
  license: string;
  authors: Author[];
  keywords: string[];
  programming_language?: string;
  target_machine?: string[];
  input_formats?: string[];
  output_formats?: string[];
  cite_as?: string;
  derived_from?: string[];
  [extra: string]: unknown;
}

export interface SourceDraft {
  scheme: "git" | "oci" | "https" | "file" | "doi";
  locator: string;
  ref?: string;
}

export interface PolicyDraft {
  enclave?: string;
  visibility: "public" | "listed" | "hidden";
  embargo_until?: string;
}

export interface ValidationIssue {
  severity: "error" | "warning";
  property: string;
  message: string;
}

export interface FairCheck {
  id: string;
  description: string;
  result: "pass" | "fail" | "not-applicable";
  evidence: string;
}

export interface FairReport {
  pid: string;
  version: number;
  checks: FairCheck[];
  score: number;
  badge: "none" | "bronze" | "silver" | "gold";
}

export interface RecordStub {
  pid: string;
  name: string;
  kind: string;
  organization: string;
  exists: true;
  access: "restricted";
}

export interface RecordFull {
  pid: string;
  kind: string;
  status: "active" | "stale" | "tombstoned";
  version: number;
  created_at: string;
  updated_at: string;
  document: MetadataDocument;
  sources: Array<SourceDraft & { checksum?: { algorithm: string; digest: string } }>;
  policy: {
    enclave: string;
    visibility: string;
    embargo_until: string | null;
    owners: string[];
    write_roles: string;
  };
  verification?: Record<string, unknown> | null;
  fairness?: FairReport | null;
  usage?: { run_count: number; latest_run_id: string; runs: string[] } | null;
  tombstone?: { pid: string; reason: string; removed_at: string; final_version: number } | null;
  access: "full";
}

export type RecordView = RecordFull | RecordStub;

export function isStub(view: RecordView): view is RecordStub {
  return view.access === "restricted";
}

export interface SearchPage {
  total: number;
  items: RecordView[];
  next_offset: number | null;
}

export interface VersionSnapshot {
  version: number;
  timestamp: string;
  document: MetadataDocument;
  sources: SourceDraft[];
  policy: Record<string, unknown>;
  digest: string;
}

export interface WhoAmI {
  subject: string;
  display_name: string;
  enclaves: string[];
  roles: string[];
  issued_via: string;
}
