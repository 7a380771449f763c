import { describe, expect, it } from "vitest";

import { MAX_SCALE, MIN_SCALE, identity, panBy, toCss, toImage, zoomAt } from "../src/zoompan.js";

describe("zoom/pan transform", () => {
  it("zooming keeps the anchor point fixed in image space", () => {
    const t0 = identity();
    const t1 = zoomAt(t0, 100, 80, 2);
    expect(toImage(t1, 100, 80)).toEqual(toImage(t0, 100, 80));
    const t2 = zoomAt(t1, 30, 200, 1 / 3);
    const [ix, iy] = toImage(t2, 30, 200);
    const [jx, jy] = toImage(t1, 30, 200);
    expect(ix).toBeCloseTo(jx, 9);
    expect(iy).toBeCloseTo(jy, 9);
  });

  it("scale clamps to the allowed range", () => {
    let t = identity();
    for (let i = 0; i < 40; i++) t = zoomAt(t, 0, 0, 2);
    expect(t.scale).toBe(MAX_SCALE);
    for (let i = 0; i < 80; i++) t = zoomAt(t, 0, 0, 0.5);
    expect(t.scale).toBe(MIN_SCALE);
  });

  it("panning is additive and scale-preserving", () => {
    const t = panBy(panBy(identity(), 5, -3), -2, 10);
    expect(t).toEqual({ scale: 1, x: 3, y: 7 });
  });

  it("css output carries both translate and scale", () => {
    expect(toCss({ scale: 2, x: 4, y: -6 })).toBe("translate(4px, -6px) scale(2)");
  });

  it("one shared transform keeps both panes synchronized", () => {
    // panes render from the same object; equality is by identity
    const shared = zoomAt(identity(), 10, 10, 3);
    const leftView = shared;
    const rightView = shared;
    expect(toCss(leftView)).toBe(toCss(rightView));
  });
});
