import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    environment: "node",
    // the integration suite boots the Python service
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
