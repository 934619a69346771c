// Typed gateway client. The session token lives in memory only; it is sent
// as a bearer header and never persisted anywhere in the browser.

import type {
  FairReport,
  MetadataDocument,
  PolicyDraft,
  RecordView,
  SearchPage,
  SourceDraft,
  VersionSnapshot,
  WhoAmI,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  reason?: string;
  report?: unknown;

  constructor(status: number, message: string, reason?: string, report?: unknown) {
    super(message);
    this.status = status;
    this.reason = reason;
    this.report = report;
  }
}

export interface SearchParams {
  q?: string;
  kind?: string;
  license?: string;
  keyword?: string;
  target_machine?: string;
  status?: string;
  namespace?: string;
  offset?: number;
  limit?: number;
  include_tombstoned?: boolean;
}

export class GatewayClient {
  readonly baseUrl: string;
  private token: string | null = null;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  setToken(token: string | null): void {
    this.token = token && token.trim() !== "" ? token.trim() : null;
  }

  hasToken(): boolean {
    return this.token !== null;
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = { ...extra };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let message = `${response.status}`;
      let reason: string | undefined;
      let report: unknown;
      try {
        const body = await response.json();
        message = body.error ?? message;
        reason = body.reason;
        report = body.report;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, message, reason, report);
    }
    return (await response.json()) as T;
  }

  whoami(): Promise<WhoAmI> {
    return this.request<WhoAmI>("/api/v1/whoami", { headers: this.headers() });
  }

  register(
    document: MetadataDocument,
    sources: SourceDraft[],
    policy: PolicyDraft,
  ): Promise<RecordView> {
    return this.request<RecordView>("/api/v1/records", {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/json" }),
      body: JSON.stringify({ document, sources, policy }),
    });
  }

  importCrate(data: ArrayBuffer | Uint8Array, policy: PolicyDraft): Promise<RecordView> {
    const params = new URLSearchParams({ visibility: policy.visibility });
    if (policy.enclave) params.set("enclave", policy.enclave);
    const body = data instanceof Uint8Array
      ? data.slice().buffer as ArrayBuffer
      : data;
    return this.request<RecordView>(`/api/v1/crates?${params}`, {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/zip" }),
      body,
    });
  }

  resolve(pid: string): Promise<RecordView> {
    return this.request<RecordView>(`/api/v1/records/${encodeURIComponent(pid)}`, {
      headers: this.headers(),
    });
  }

  versions(pid: string): Promise<{ pid: string; versions: VersionSnapshot[] }> {
    return this.request(`/api/v1/records/${encodeURIComponent(pid)}/versions`, {
      headers: this.headers(),
    });
  }

  search(params: SearchParams): Promise<SearchPage> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined && value !== "" && value !== false) {
        query.set(key, String(value));
      }
    }
    const suffix = query.toString() ? `?${query}` : "";
    return this.request<SearchPage>(`/api/v1/search${suffix}`, { headers: this.headers() });
  }

  assess(pid: string): Promise<FairReport> {
    return this.request<FairReport>(`/api/v1/records/${encodeURIComponent(pid)}/assess`, {
      method: "POST",
      headers: this.headers(),
    });
  }

  setEmbargo(pid: string, until: string): Promise<Record<string, unknown>> {
    return this.request(`/api/v1/records/${encodeURIComponent(pid)}/embargo`, {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/json" }),
      body: JSON.stringify({ until }),
    });
  }

  crateDownloadUrl(pid: string): string {
    return `${this.baseUrl}/api/v1/records/${encodeURIComponent(pid)}/crate`;
  }
}
