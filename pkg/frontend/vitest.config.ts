import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    fileParallelism: false,   // integration files each spawn an engine server
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
