import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    // the flow suite boots the real service, which trains a model first
    testTimeout: 180_000,
    hookTimeout: 180_000,
    fileParallelism: false,
  },
});
