// Faceted discovery: query state lives in the URL, every toggle issues a
// search call, and the detail pane renders badges, versions, verification
// and run links. Tombstoned records keep their metadata behind a banner;
// listed-mode records render as existence stubs without download controls.

import { GatewayClient, ApiError } from "../api.js";
import { Store } from "../store.js";
import type { RecordFull, RecordView, SearchPage } from "../types.js";
import { isStub } from "../types.js";
import {
  DEFAULT_QUERY,
  QueryState,
  pushQueryToUrl,
  queryFromUrl,
} from "./urlState.js";

export interface DiscoveryState {
  query: QueryState;
  page: SearchPage | null;
  detail: RecordView | null;
  versions: number[];
  error: string | null;
  loading: boolean;
}

const KIND_OPTIONS = ["", "workflow", "code", "container", "dataset", "model", "service"];
const STATUS_OPTIONS = ["", "active", "stale", "tombstoned"];

export function renderDiscovery(root: HTMLElement, client: GatewayClient): Store<DiscoveryState> {
  const store = new Store<DiscoveryState>({
    query: queryFromUrl(),
    page: null,
    detail: null,
    versions: [],
    error: null,
    loading: false,
  });

  const container = el("div", "discovery");
  const facets = el("aside", "facet-panel");
  const results = el("section", "result-panel");
  const detail = el("section", "detail-panel");
  root.replaceChildren(container);
  container.append(facets, results, detail);

  // responses of superseded searches are dropped, never rendered
  let searchSequence = 0;

  async function runSearch(): Promise<void> {
    const { query } = store.get();
    const sequence = ++searchSequence;
    store.set({ loading: true, error: null });
    try {
      const page = await client.search({
        q: query.text || undefined,
        kind: query.kind || undefined,
        keyword: query.keyword || undefined,
        license: query.license || undefined,
        status: query.status || undefined,
        namespace: query.namespace || undefined,
        target_machine: query.target_machine || undefined,
        offset: query.offset,
        limit: query.limit,
        include_tombstoned: query.include_tombstoned || undefined,
      });
      if (sequence !== searchSequence) return;
      store.set({ page, loading: false });
    } catch (err) {
      if (sequence !== searchSequence) return;
      store.set({
        error: err instanceof Error ? err.message : String(err),
        loading: false,
      });
    }
    if (store.get().query.selected) {
      await openDetail(store.get().query.selected, false);
    } else {
      store.set({ detail: null, versions: [] });
    }
  }

  async function openDetail(pid: string, push = true): Promise<void> {
    try {
      const view = await client.resolve(pid);
      let versions: number[] = [];
      if (!isStub(view)) {
        try {
          const history = await client.versions(pid);
          versions = history.versions.map((v) => v.version);
        } catch {
          versions = [];
        }
      }
      const query = { ...store.get().query, selected: pid };
      if (push) pushQueryToUrl(query);
      store.set({ detail: view, versions, query });
    } catch (err) {
      const missing = err instanceof ApiError && err.status === 404;
      store.set({
        detail: null,
        versions: [],
        error: missing ? `no visible record for ${pid}` : String(err),
      });
    }
  }

  function setQuery(patch: Partial<QueryState>, resetOffset = true): void {
    const query = { ...store.get().query, ...patch };
    if (resetOffset && !("offset" in patch)) query.offset = 0;
    pushQueryToUrl(query);
    store.set({ query });
    void runSearch();
  }

  function renderFacets(state: DiscoveryState) {
    facets.replaceChildren();
    const heading = el("h3");
    heading.textContent = "Refine";
    facets.appendChild(heading);

    facets.appendChild(searchBox(state.query.text, (text) => setQuery({ text })));
    facets.appendChild(facetSelect("Kind", state.query.kind, KIND_OPTIONS,
      (kind) => setQuery({ kind })));
    facets.appendChild(facetSelect("Status", state.query.status, STATUS_OPTIONS,
      (status) => setQuery({ status })));
    facets.appendChild(facetText("Keyword", state.query.keyword,
      (keyword) => setQuery({ keyword })));
    facets.appendChild(facetText("License", state.query.license,
      (license) => setQuery({ license })));
    facets.appendChild(facetText("Namespace", state.query.namespace,
      (namespace) => setQuery({ namespace })));
    facets.appendChild(facetText("Target machine PID", state.query.target_machine,
      (target_machine) => setQuery({ target_machine })));

    const tombstoned = el("label", "facet-checkbox");
    const checkbox = el("input") as HTMLInputElement;
    checkbox.type = "checkbox";
    checkbox.checked = state.query.include_tombstoned;
    checkbox.addEventListener("change", () =>
      setQuery({ include_tombstoned: checkbox.checked }));
    tombstoned.append(checkbox, document.createTextNode(" include tombstoned"));
    facets.appendChild(tombstoned);
  }

  function renderResults(state: DiscoveryState) {
    results.replaceChildren();
    if (state.error) {
      results.appendChild(banner(state.error, "error-banner retryable"));
      const retry = el("button") as HTMLButtonElement;
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void runSearch());
      results.appendChild(retry);
      return;
    }
    const count = el("p", "result-count");
    count.textContent = state.page === null
      ? (state.loading ? "searching..." : "no search yet")
      : `${state.page.total} result(s)`;
    results.appendChild(count);
    if (state.page === null) return;

    const list = el("ul", "result-list");
    for (const item of state.page.items) {
      const row = el("li", "result-row");
      const open = el("a", "result-link") as HTMLAnchorElement;
      open.href = `#/discover?${new URLSearchParams({ selected: item.pid })}`;
      open.textContent = isStub(item)
        ? `${item.name} (restricted)`
        : `${item.document.name}`;
      open.addEventListener("click", (event) => {
        event.preventDefault();
        void openDetail(item.pid);
      });
      row.appendChild(open);
      const meta = el("span", "result-meta");
      const badge = !isStub(item) && item.fairness ? ` · ${item.fairness.badge}` : "";
      meta.textContent = ` ${item.pid} · ${item.kind}${badge}`;
      row.appendChild(meta);
      list.appendChild(row);
    }
    results.appendChild(list);

    const pager = el("div", "pager");
    const prev = el("button") as HTMLButtonElement;
    prev.textContent = "Previous";
    prev.disabled = state.query.offset === 0;
    prev.addEventListener("click", () =>
      setQuery({ offset: Math.max(0, state.query.offset - state.query.limit) }, false));
    const next = el("button") as HTMLButtonElement;
    next.textContent = "Next";
    next.disabled = state.page.next_offset === null;
    next.addEventListener("click", () => {
      const offset = store.get().page?.next_offset;
      if (offset != null) setQuery({ offset }, false);
    });
    pager.append(prev, next);
    results.appendChild(pager);
  }

  function renderDetail(state: DiscoveryState) {
    detail.replaceChildren();
    const view = state.detail;
    if (!view) return;

    if (isStub(view)) {
      const heading = el("h3");
      heading.textContent = view.name;
      const stub = el("div", "stub-page");
      stub.textContent =
        `artifact exists; access restricted (${view.organization})`;
      detail.append(heading, stub);
      const pid = el("p", "pid-line");
      pid.textContent = view.pid;
      detail.appendChild(pid);
      return; // stubs expose no download control
    }

    const record = view as RecordFull;
    const heading = el("h3");
    heading.textContent = record.document.name;
    detail.appendChild(heading);

    if (record.status === "tombstoned" && record.tombstone) {
      detail.appendChild(banner(
        `tombstoned: ${record.tombstone.reason} (final version ` +
          `${record.tombstone.final_version}, ${record.tombstone.removed_at})`,
        "tombstone-banner"));
    }
    if (record.status === "stale") {
      detail.appendChild(banner("watch detected drift: record is stale", "inline-warning"));
    }

    const pid = el("p", "pid-line");
    pid.textContent = `${record.pid} · v${record.version} · ${record.status}`;
    detail.appendChild(pid);

    if (record.fairness) {
      const fair = el("p");
      fair.innerHTML = `FAIR ${record.fairness.score}/12 ` +
        `<span class="badge badge-${record.fairness.badge}">${record.fairness.badge}</span>`;
      detail.appendChild(fair);
    }

    const description = el("p", "description");
    description.textContent = record.document.description;
    detail.appendChild(description);

    const versions = el("p", "versions");
    versions.textContent = `versions: ${state.versions.join(", ") || record.version}`;
    detail.appendChild(versions);

    if (record.verification) {
      const verification = el("p", "verification");
      verification.textContent = `verification: ${JSON.stringify(record.verification)}`;
      detail.appendChild(verification);
    }
    if (record.usage) {
      const usage = el("p", "runs");
      usage.textContent =
        `runs: ${record.usage.run_count} (latest ${record.usage.latest_run_id})`;
      detail.appendChild(usage);
    }

    if (record.status !== "tombstoned") {
      const download = el("a", "download-control") as HTMLAnchorElement;
      download.href = client.crateDownloadUrl(record.pid);
      download.textContent = "Download crate";
      detail.appendChild(download);
    }
  }

  store.subscribe((state) => {
    renderFacets(state);
    renderResults(state);
    renderDetail(state);
  });

  window.addEventListener("popstate", () => {
    store.set({ query: queryFromUrl() });
    void runSearch();
  });

  void runSearch();
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

function searchBox(value: string, onSearch: (text: string) => void): HTMLElement {
  const wrap = el("div", "field");
  const input = el("input") as HTMLInputElement;
  input.type = "search";
  input.placeholder = "free text";
  input.value = value;
  input.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") onSearch(input.value);
  });
  const go = el("button") as HTMLButtonElement;
  go.textContent = "Search";
  go.addEventListener("click", () => onSearch(input.value));
  wrap.append(input, go);
  return wrap;
}

function facetSelect(
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
    node.textContent = option === "" ? "(any)" : option;
    if (option === value) node.selected = true;
    select.appendChild(node);
  }
  select.addEventListener("change", () => onChange(select.value));
  field.append(labelNode, select);
  return field;
}

function facetText(label: string, value: string, onChange: (value: string) => void): HTMLElement {
  const field = el("div", "field");
  const labelNode = el("label");
  labelNode.textContent = label;
  const input = el("input") as HTMLInputElement;
  input.type = "text";
  input.value = value;
  input.addEventListener("change", () => onChange(input.value));
  field.append(labelNode, input);
  return field;
}
