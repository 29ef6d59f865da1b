import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    testTimeout: 300_000,
    hookTimeout: 300_000,
    // the model forward pass blocks the event loop for tens of seconds;
    // process isolation keeps the runner's heartbeat alive
    pool: 'forks',
  },
});
