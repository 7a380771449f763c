import { describe, expect, it } from "vitest";

import { DEBOUNCE_MS, SLIDER_BOUNDS } from "../src/constants.js";
import { validateParam } from "../src/controller.js";

import { makeRig } from "./helpers.js";

describe("slider bounds", () => {
  it("match the documented tuning ranges", () => {
    expect([SLIDER_BOUNDS.sigma_s.min, SLIDER_BOUNDS.sigma_s.max]).toEqual([1, 20]);
    expect([SLIDER_BOUNDS.sigma_r.min, SLIDER_BOUNDS.sigma_r.max]).toEqual([1, 10]);
    expect([SLIDER_BOUNDS.strel_radius.min, SLIDER_BOUNDS.strel_radius.max]).toEqual([10, 30]);
    expect([SLIDER_BOUNDS.convex_threshold.min, SLIDER_BOUNDS.convex_threshold.max]).toEqual([
      0.6, 0.75,
    ]);
  });

  it("debounce interval is 250 ms", () => {
    expect(DEBOUNCE_MS).toBe(250);
  });

  it("validateParam accepts the full range and rejects outside it", () => {
    for (const [name, b] of Object.entries(SLIDER_BOUNDS)) {
      const key = name as keyof typeof SLIDER_BOUNDS;
      expect(validateParam(key, b.min)).toBeNull();
      expect(validateParam(key, b.max)).toBeNull();
      expect(validateParam(key, (b.min + b.max) / 2)).toBeNull();
      expect(validateParam(key, b.min - 0.01)).not.toBeNull();
      expect(validateParam(key, b.max + 0.01)).not.toBeNull();
    }
  });
});

describe("client bounds vs service validation contract", () => {
  it("in-bounds values are never rejected by the (mirrored) service", async () => {
    const { api, ctl, timer } = await makeRig();
    const b = SLIDER_BOUNDS.sigma_s;
    for (const v of [b.min, (b.min + b.max) / 2, b.max]) {
      ctl.setParam("layers.0.bilateral.sigma_s", v);
      await timer.advance(DEBOUNCE_MS);
    }
    expect(api.count("patchParams")).toBe(3);
    expect(ctl.store.get().validation).toEqual({});
  });

  it("out-of-bounds slider values never reach the service", async () => {
    const { api, ctl, timer } = await makeRig();
    ctl.setParam("layers.0.bilateral.sigma_s", 0);
    ctl.setParam("layers.0.bilateral.sigma_s", 25);
    await timer.advance(DEBOUNCE_MS * 2);
    expect(api.count("patchParams")).toBe(0);
    expect(Object.keys(ctl.store.get().validation)).toContain("layers.0.bilateral.sigma_s");
  });

  it("a service 422 lands on the offending control", async () => {
    const { api, ctl, timer } = await makeRig();
    // ball_area_px has no slider bound, so a crafted bad sigma can only
    // be rejected server-side; simulate by patching through accumulate
    ctl.setParam("layers.2.bilateral.sigma_r", 3);
    // sabotage: force the pending patch to carry an invalid width
    (ctl as unknown as { pending: { layers: unknown } }).pending = {
      layers: [null, null, { bilateral: { sigma_s: -1 } }],
    };
    await timer.advance(DEBOUNCE_MS);
    expect(api.count("patchParams")).toBe(1);
    expect(ctl.store.get().validation["layers.2.bilateral.sigma_s"]).toBe("must be > 0");
  });
});
