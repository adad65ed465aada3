import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The integration file boots the Python service; never parallelize
    // against the fixed port.
    fileParallelism: false,
  },
});
