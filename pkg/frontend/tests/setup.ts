// jsdom provides no web-streams implementation; borrow node's, which is what
// a real browser would supply natively.

import * as streams from "node:stream/web";

for (const name of [
  "ReadableStream",
  "WritableStream",
  "TransformStream",
  "CompressionStream",
  "DecompressionStream",
] as const) {
  if (!(name in globalThis) || (globalThis as Record<string, unknown>)[name] === undefined) {
    (globalThis as Record<string, unknown>)[name] = (streams as Record<string, unknown>)[name];
  }
}
