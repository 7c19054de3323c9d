import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 30000,
    // the e2e suite talks to one spawned service; keep files sequential
    fileParallelism: false,
  },
});
