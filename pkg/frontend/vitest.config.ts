import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    setupFiles: ["tests/setup.ts"],
    include: ["tests/**/*.spec.ts"],
    testTimeout: 60000,
    hookTimeout: 60000,
  },
});
