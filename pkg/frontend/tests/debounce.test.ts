import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounce } from "../src/debounce";

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once per quiet period with the last arguments", () => {
    const seen: number[] = [];
    const d = debounce((x: number) => seen.push(x), 250);
    d(1);
    vi.advanceTimersByTime(100);
    d(2);
    vi.advanceTimersByTime(100);
    d(3);
    expect(seen).toEqual([]);
    vi.advanceTimersByTime(250);
    expect(seen).toEqual([3]);
  });

  it("fires again after the quiet period", () => {
    const seen: number[] = [];
    const d = debounce((x: number) => seen.push(x), 250);
    d(1);
    vi.advanceTimersByTime(250);
    d(2);
    vi.advanceTimersByTime(250);
    expect(seen).toEqual([1, 2]);
  });

  it("cancel drops the pending call", () => {
    const seen: number[] = [];
    const d = debounce((x: number) => seen.push(x), 250);
    d(1);
    d.cancel();
    vi.advanceTimersByTime(1000);
    expect(seen).toEqual([]);
  });

  it("flush invokes immediately", () => {
    const seen: number[] = [];
    const d = debounce((x: number) => seen.push(x), 250);
    d(7);
    d.flush();
    expect(seen).toEqual([7]);
    vi.advanceTimersByTime(1000);
    expect(seen).toEqual([7]);
  });
});
