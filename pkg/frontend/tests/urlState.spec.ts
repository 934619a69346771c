// Query state and URL must be a bijection: restoring a copied URL reproduces
// the identical query and page position.

import { describe, expect, it } from "vitest";
import {
  DEFAULT_QUERY,
  decodeQuery,
  encodeQuery,
  QueryState,
} from "../src/discovery/urlState.js";

const SAMPLES: Partial<QueryState>[] = [
  {},
  { text: "genome" },
  { kind: "workflow", keyword: "gpu" },
  { status: "tombstoned", include_tombstoned: true },
  { text: "human reference", offset: 40, limit: 10 },
  { namespace: "eosc", selected: "eosc:wf-00000004" },
  { license: "Apache-2.0", target_machine: "olcf:sv-00000001" },
  { text: "a&b=c %20+", keyword: "odd chars" },
];

describe("discovery URL state", () => {
  for (const [i, patch] of SAMPLES.entries()) {
    it(`round-trips sample ${i}`, () => {
      const state: QueryState = { ...DEFAULT_QUERY, ...patch };
      expect(decodeQuery(encodeQuery(state))).toEqual(state);
    });
  }

  it("defaults encode to the empty string", () => {
    expect(encodeQuery({ ...DEFAULT_QUERY })).toBe("");
  });

  it("decoding twice is stable", () => {
    const once = decodeQuery("kind=dataset&offset=20&include_tombstoned=1");
    expect(decodeQuery(encodeQuery(once))).toEqual(once);
  });

  it("ignores malformed paging values", () => {
    const state = decodeQuery("offset=banana&limit=-3");
    expect(state.offset).toBe(0);
    expect(state.limit).toBe(DEFAULT_QUERY.limit);
  });
});
