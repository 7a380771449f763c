import { describe, expect, it } from "vitest";

import { DEBOUNCE_MS } from "../src/constants.js";

import { flushMicrotasks, makeRig } from "./helpers.js";

describe("debounced patching", () => {
  it("a slider drag fires exactly one PATCH after the debounce interval", async () => {
    const { api, ctl, timer } = await makeRig();
    for (const v of [11, 12, 13, 14, 15]) {
      ctl.setParam("layers.0.seg.strel_radius", v);
      await timer.advance(DEBOUNCE_MS / 5);
    }
    expect(api.count("patchParams")).toBe(0); // still inside the burst
    await timer.advance(DEBOUNCE_MS);
    expect(api.count("patchParams")).toBe(1);
    const patch = api.calls.find((c) => c.method === "patchParams")!.patch!;
    expect(patch.layers?.[0]?.seg?.strel_radius).toBe(15); // last value wins
  });

  it("separate deliberate adjustments patch separately", async () => {
    const { api, ctl, timer } = await makeRig();
    ctl.setParam("layers.0.seg.strel_radius", 12);
    await timer.advance(DEBOUNCE_MS);
    ctl.setParam("layers.1.seg.strel_radius", 16);
    await timer.advance(DEBOUNCE_MS);
    expect(api.count("patchParams")).toBe(2);
  });
});

describe("invalidation-driven refresh", () => {
  it("refreshes exactly the reported stages that are on screen", async () => {
    const { api, ctl, timer } = await makeRig();
    await ctl.selectStage("filtered", "top");
    api.clear();
    // calibration-only change: service reports analysis + overlay
    api.invalidatedQueue.push([
      { stage: "analysis", layer: null },
      { stage: "overlay", layer: null },
    ]);
    ctl.setParam("calibration.convex_threshold", 0.65);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    expect(api.stageFetches()).toEqual([["overlay", null]]); // left pane untouched
    expect(api.count("fetchResult")).toBe(1);
  });

  it("refreshes a layer pane only when its layer is invalidated", async () => {
    const { api, ctl, timer } = await makeRig();
    await ctl.selectStage("filtered", "top");
    api.clear();
    api.invalidatedQueue.push([
      { stage: "filtered", layer: "bottom" },
      { stage: "opened_closed", layer: "bottom" },
      { stage: "markers", layer: "bottom" },
      { stage: "gradient", layer: "bottom" },
      { stage: "labels", layer: null },
      { stage: "analysis", layer: null },
      { stage: "overlay", layer: null },
    ]);
    ctl.setParam("layers.2.bilateral.sigma_s", 9);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    // top-layer filtered pane not in the report: only overlay refetches
    expect(api.stageFetches()).toEqual([["overlay", null]]);
    expect(api.count("fetchResult")).toBe(1);
  });

  it("refreshes the selected pane when its stage and layer are reported", async () => {
    const { api, ctl, timer } = await makeRig();
    await ctl.selectStage("markers", "bottom");
    api.clear();
    api.invalidatedQueue.push([
      { stage: "opened_closed", layer: "bottom" },
      { stage: "markers", layer: "bottom" },
      { stage: "labels", layer: null },
      { stage: "analysis", layer: null },
      { stage: "overlay", layer: null },
    ]);
    ctl.setParam("layers.2.seg.strel_radius", 18);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    expect(api.stageFetches().sort()).toEqual([
      ["markers", "bottom"],
      ["overlay", null],
    ]);
  });

  it("an empty invalidation report refreshes nothing", async () => {
    const { api, ctl, timer } = await makeRig();
    api.clear();
    api.invalidatedQueue.push([]);
    ctl.setParam("layers.0.seg.strel_radius", 14); // same value as current
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    expect(api.stageFetches()).toEqual([]);
    expect(api.count("fetchResult")).toBe(0);
  });
});

describe("staleness tagging", () => {
  it("a displayed result whose digest differs from the form is stale", async () => {
    const { ctl, api, timer } = await makeRig();
    const store = ctl.store;
    expect(store.isStale(store.get().result.digest)).toBe(false);
    // edit without letting the refresh land yet
    api.invalidatedQueue.push([{ stage: "analysis", layer: null }]);
    ctl.setParam("calibration.convex_threshold", 0.7);
    // before the debounce fires, the form digest already moved on
    expect(store.isStale(store.get().result.digest)).toBe(true);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    // refresh landed: digests line up again
    expect(store.isStale(store.get().result.digest)).toBe(false);
  });

  it("panes keep their digest tag and read as stale after an edit", async () => {
    const { ctl, api, timer } = await makeRig();
    const store = ctl.store;
    expect(store.isStale(store.get().right.digest)).toBe(false);
    api.invalidatedQueue.push([
      { stage: "analysis", layer: null },
      { stage: "overlay", layer: null },
    ]);
    ctl.setParam("calibration.small_threshold", 0.2);
    expect(store.isStale(store.get().right.digest)).toBe(true);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    expect(store.isStale(store.get().right.digest)).toBe(false);
    expect(store.get().right.url).toBeTruthy();
  });

  it("a superseding edit drops the in-flight image (latest wins)", async () => {
    const { ctl, api, timer } = await makeRig();
    const store = ctl.store;
    let release: (() => void) | null = null;
    const original = api.fetchStage.bind(api);
    api.fetchStage = async (id, stage, layer) => {
      const blob = await original(id, stage, layer);
      if (stage === "overlay") {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      return blob;
    };
    api.invalidatedQueue.push([{ stage: "overlay", layer: null }]);
    ctl.setParam("calibration.large_threshold", 8.0);
    await timer.advance(DEBOUNCE_MS);
    await flushMicrotasks();
    const digestDuringFetch = store.formDigest();
    // user keeps editing while the overlay is still computing
    ctl.setParam("calibration.large_threshold", 9.0);
    expect(store.formDigest()).not.toBe(digestDuringFetch);
    release!();
    await flushMicrotasks();
    // the late image was not applied; the pane still shows the old tag
    expect(store.get().right.digest).not.toBe(digestDuringFetch);
    expect(store.isStale(store.get().right.digest)).toBe(true);
  });
});

describe("conflict reporting", () => {
  it("a 409 from a stage renders as an error payload on the pane", async () => {
    const { ctl, api } = await makeRig();
    api.stageFailures.set("markers", { error: "EmptyMarkers", layer: "top" });
    await ctl.selectStage("markers", "top");
    const pane = ctl.store.get().left;
    expect(pane.error).toEqual({ error: "EmptyMarkers", layer: "top" });
    expect(pane.url).toBeNull();
  });
});
