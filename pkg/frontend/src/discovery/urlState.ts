// Discovery query state <-> URL. The whole query (text, facets, paging,
// selected record) round-trips through the URL, so any result page is
// shareable and restorable.

export interface QueryState {
  text: string;
  kind: string;
  keyword: string;
  license: string;
  status: string;
  namespace: string;
  target_machine: string;
  offset: number;
  limit: number;
  include_tombstoned: boolean;
  selected: string; // PID of the open detail view, or ""
}

export const DEFAULT_QUERY: QueryState = {
  text: "",
  kind: "",
  keyword: "",
  license: "",
  status: "",
  namespace: "",
  target_machine: "",
  offset: 0,
  limit: 20,
  include_tombstoned: false,
  selected: "",
};

const STRING_KEYS = [
  "text",
  "kind",
  "keyword",
  "license",
  "status",
  "namespace",
  "target_machine",
  "selected",
] as const;

export function encodeQuery(state: QueryState): string {
  const params = new URLSearchParams();
  for (const key of STRING_KEYS) {
    if (state[key] !== "") params.set(key, state[key]);
  }
  if (state.offset !== 0) params.set("offset", String(state.offset));
  if (state.limit !== DEFAULT_QUERY.limit) params.set("limit", String(state.limit));
  if (state.include_tombstoned) params.set("include_tombstoned", "1");
  return params.toString();
}

export function decodeQuery(search: string): QueryState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const state: QueryState = { ...DEFAULT_QUERY };
  for (const key of STRING_KEYS) {
    const value = params.get(key);
    if (value !== null) state[key] = value;
  }
  const offset = params.get("offset");
  if (offset !== null && /^\d+$/.test(offset)) state.offset = parseInt(offset, 10);
  const limit = params.get("limit");
  if (limit !== null && /^\d+$/.test(limit)) state.limit = parseInt(limit, 10);
  state.include_tombstoned = params.get("include_tombstoned") === "1";
  return state;
}

export function pushQueryToUrl(state: QueryState): void {
  const encoded = encodeQuery(state);
  const hash = encoded ? `#/discover?${encoded}` : "#/discover";
  if (window.location.hash !== hash) {
    window.history.pushState({}, "", hash);
  }
}

export function queryFromUrl(): QueryState {
  const hash = window.location.hash;
  const queryStart = hash.indexOf("?");
  return decodeQuery(queryStart >= 0 ? hash.slice(queryStart + 1) : "");
}
