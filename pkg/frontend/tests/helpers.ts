import { TunerController } from "../src/controller.js";
import { Store } from "../src/store.js";
import { ServiceError } from "../src/types.js";
import type {
  ConfigPatch,
  InvalidatedStage,
  LayerName,
  ResultDoc,
  ServiceApi,
  SessionInfo,
  StageName,
} from "../src/types.js";

/** Deterministic scheduler so debounce behavior is testable. */
export class FakeTimer {
  private queue: { at: number; fn: () => void; id: number }[] = [];
  private now = 0;
  private nextId = 1;

  schedule = (fn: () => void, ms: number): unknown => {
    const id = this.nextId++;
    this.queue.push({ at: this.now + ms, fn, id });
    return id;
  };

  cancel = (handle: unknown): void => {
    this.queue = this.queue.filter((e) => e.id !== handle);
  };

  async advance(ms: number): Promise<void> {
    this.now += ms;
    const due = this.queue.filter((e) => e.at <= this.now).sort((a, b) => a.at - b.at);
    this.queue = this.queue.filter((e) => e.at > this.now);
    for (const e of due) e.fn();
    await flushMicrotasks();
  }
}

export async function flushMicrotasks(): Promise<void> {
  for (let i = 0; i < 20; i++) await Promise.resolve();
}

export interface RecordedCall {
  method: string;
  stage?: StageName;
  layer?: LayerName | null;
  patch?: ConfigPatch;
}

/** Scripted stand-in for the tuning service: every call is recorded and
 * the next PATCH response is whatever the test enqueued. Parameter
 * validation mirrors the service's rules (non-positive widths 422 with
 * the offending field path). */
export class MockService implements ServiceApi {
  calls: RecordedCall[] = [];
  invalidatedQueue: InvalidatedStage[][] = [];
  result: ResultDoc = {
    image_area_px: 28800,
    mode: "stitched",
    params_digest: "svc",
    pds_percent: 42.5,
    final_pds: 42.5,
    per_layer_pds: null,
    typical_area_px: 16560,
    category_counts: { small: 1, typical: 4, large: 0, convex_fail: 1 },
    category_areas: { small: 120, typical: 16560, large: 0, convex_fail: 800 },
    segments: [],
  };
  stageFailures = new Map<string, { error: string; layer?: string }>();

  async createSession(): Promise<SessionInfo> {
    this.calls.push({ method: "createSession" });
    return { id: "session-1", width: 160, height: 180 };
  }

  async patchParams(
    _id: string,
    patch: ConfigPatch,
  ): Promise<{ invalidated: InvalidatedStage[] }> {
    this.calls.push({ method: "patchParams", patch });
    const bad = findInvalidSigma(patch);
    if (bad) {
      throw new ServiceError(422, {
        error: "invalid parameter",
        field: bad,
        reason: "must be > 0",
      });
    }
    return { invalidated: this.invalidatedQueue.shift() ?? [] };
  }

  async fetchStage(_id: string, stage: StageName, layer: LayerName | null): Promise<Blob> {
    this.calls.push({ method: "fetchStage", stage, layer });
    const failure = this.stageFailures.get(stage);
    if (failure) throw new ServiceError(409, failure);
    return new Blob([`png:${stage}:${layer ?? ""}`]);
  }

  async fetchResult(): Promise<ResultDoc> {
    this.calls.push({ method: "fetchResult" });
    return this.result;
  }

  async deleteSession(): Promise<void> {
    this.calls.push({ method: "deleteSession" });
  }

  stageFetches(): [StageName, LayerName | null][] {
    return this.calls
      .filter((c) => c.method === "fetchStage")
      .map((c) => [c.stage!, c.layer ?? null]);
  }

  count(method: string): number {
    return this.calls.filter((c) => c.method === method).length;
  }

  clear(): void {
    this.calls = [];
  }
}

function findInvalidSigma(patch: ConfigPatch): string | null {
  if (!patch.layers) return null;
  for (let i = 0; i < patch.layers.length; i++) {
    const layer = patch.layers[i];
    if (!layer?.bilateral) continue;
    for (const key of ["sigma_s", "sigma_r"] as const) {
      const v = layer.bilateral[key];
      if (v !== undefined && v <= 0) return `layers[${i}].bilateral.${key}`;
    }
  }
  return null;
}

export interface Rig {
  api: MockService;
  store: Store;
  timer: FakeTimer;
  ctl: TunerController;
}

export async function makeRig(): Promise<Rig> {
  const api = new MockService();
  const store = new Store();
  const timer = new FakeTimer();
  let urls = 0;
  const ctl = new TunerController(api, store, {
    schedule: timer.schedule,
    cancel: timer.cancel,
    createObjectUrl: () => `blob:${urls++}`,
  });
  await ctl.uploadImage(new Blob(["img"]), "img.png");
  api.clear();
  return { api, store, timer, ctl };
}
