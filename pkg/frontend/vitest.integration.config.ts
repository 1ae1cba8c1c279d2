import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/roundtrip.integration.test.ts'],
    environment: 'node',
    testTimeout: 120_000,
  },
});
