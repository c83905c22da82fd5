// Plain object (not defineConfig) so the config loads even when vitest
// is provided by the environment rather than a local install.
export default {
  test: {
    // e2e spawns the real service; give startup and inference room
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
};
