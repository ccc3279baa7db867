import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 120_000,
    // the parity suites drive one shared service process; keep files serial
    fileParallelism: false,
  },
});
