import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 60_000,
    // tfjs training benchmarks are serial and CPU-bound
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
