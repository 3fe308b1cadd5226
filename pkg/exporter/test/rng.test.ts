import { describe, expect, it } from "vitest";

import { mulberry32, shuffle } from "../src/rng.js";

describe("mulberry32", () => {
  it("is reproducible for a fixed seed", () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    for (let i = 0; i < 100; i++) {
      expect(a()).toBe(b());
    }
  });

  it("stays in the unit interval", () => {
    const rand = mulberry32(7);
    for (let i = 0; i < 1000; i++) {
      const value = rand();
      expect(value).toBeGreaterThanOrEqual(0);
      expect(value).toBeLessThan(1);
    }
  });

  it("differs across seeds", () => {
    expect(mulberry32(1)()).not.toBe(mulberry32(2)());
  });
});

describe("shuffle", () => {
  it("permutes in place and keeps all items", () => {
    const items = Array.from({ length: 50 }, (_, i) => i);
    shuffle(items, mulberry32(3));
    expect([...items].sort((x, y) => x - y)).toEqual(
      Array.from({ length: 50 }, (_, i) => i),
    );
    expect(items).not.toEqual(Array.from({ length: 50 }, (_, i) => i));
  });

  it("is deterministic for a fixed rand source", () => {
    const a = [1, 2, 3, 4, 5, 6, 7, 8];
    const b = [...a];
    shuffle(a, mulberry32(9));
    shuffle(b, mulberry32(9));
    expect(a).toEqual(b);
  });
});
