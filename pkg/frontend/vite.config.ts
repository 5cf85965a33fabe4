import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'node',
    testTimeout: 40000,
    hookTimeout: 40000,
  },
});
