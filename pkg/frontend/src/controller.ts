import { DEBOUNCE_MS, LAYER_STAGES, SLIDER_BOUNDS } from "./constants.js";
import type { BoundedParam } from "./constants.js";
import { Store } from "./store.js";
import { ServiceError } from "./types.js";
import type {
  ConfigDoc,
  ConfigPatch,
  InvalidatedStage,
  LayerName,
  LayerPatch,
  ServiceApi,
  StageName,
} from "./types.js";

type Scheduler = (fn: () => void, ms: number) => unknown;
type Canceller = (handle: unknown) => void;

/** Client-side range check; returns a message when the value is outside
 * the same bounds the service enforces. */
export function validateParam(name: BoundedParam, value: number): string | null {
  const b = SLIDER_BOUNDS[name];
  if (Number.isNaN(value)) return `${name} must be a number`;
  if (value < b.min || value > b.max) {
    return `${name} must be between ${b.min} and ${b.max}`;
  }
  return null;
}

function boundedName(path: string): BoundedParam | null {
  const leaf = path.split(".").pop() ?? "";
  return leaf in SLIDER_BOUNDS ? (leaf as BoundedParam) : null;
}

/** Wires the store to the service: debounced parameter patches, stage
 * refreshes driven by the service's invalidation report, and
 * digest-tagged (latest wins) pane updates. */
export class TunerController {
  private pending: ConfigPatch = {};
  private timer: unknown = null;
  private inflight = new Map<string, string>();
  private urlFor: (blob: Blob) => string;

  constructor(
    private api: ServiceApi,
    public store: Store,
    opts: {
      schedule?: Scheduler;
      cancel?: Canceller;
      debounceMs?: number;
      createObjectUrl?: (blob: Blob) => string;
    } = {},
  ) {
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ?? ((h) => clearTimeout(h as number));
    this.debounceMs = opts.debounceMs ?? DEBOUNCE_MS;
    this.urlFor = opts.createObjectUrl ?? ((blob) => URL.createObjectURL(blob));
  }

  private schedule: Scheduler;
  private cancel: Canceller;
  private debounceMs: number;

  // -- session ------------------------------------------------------------

  async uploadImage(file: Blob, name: string): Promise<void> {
    const info = await this.api.createSession(file, name);
    this.store.reset();
    this.store.update({
      sessionId: info.id,
      imageWidth: info.width,
      imageHeight: info.height,
    });
    await this.pushFullConfig();
    await Promise.all([
      this.refreshPane("left"),
      this.refreshPane("right"),
      this.refreshResult(),
    ]);
  }

  /** Align the server with the whole current form state (after upload,
   * since the form may differ from server defaults). */
  private async pushFullConfig(): Promise<void> {
    const id = this.store.get().sessionId;
    if (!id) return;
    await this.api.patchParams(id, this.store.get().config as ConfigPatch);
  }

  // -- parameter edits ------------------------------------------------------

  /** Record an edit like "layers.2.bilateral.sigma_s" or "mode"; PATCHes
   * are debounced so a slider drag produces one request. */
  setParam(path: string, value: number | string | null): void {
    const bounded = boundedName(path);
    if (bounded !== null && typeof value === "number") {
      const message = validateParam(bounded, value);
      const validation = { ...this.store.get().validation };
      if (message) {
        validation[path] = message;
        this.store.update({ validation });
        return; // never send out-of-bounds values
      }
      delete validation[path];
      this.store.update({ validation });
    }
    const config = structuredClonePolyfill(this.store.get().config);
    assignPath(config, path, value);
    this.store.update({ config });
    this.accumulate(path, value);
    if (this.timer !== null) this.cancel(this.timer);
    this.timer = this.schedule(() => void this.flush(), this.debounceMs);
  }

  private accumulate(path: string, value: unknown): void {
    const parts = path.split(".");
    if (parts[0] === "layers") {
      const idx = Number(parts[1]);
      const layers = (this.pending.layers ?? [null, null, null]) as [
        LayerPatch | null,
        LayerPatch | null,
        LayerPatch | null,
      ];
      const group = parts[2] as "bilateral" | "seg";
      const leaf = parts[3];
      const entry = (layers[idx] ?? {}) as Record<string, Record<string, unknown>>;
      entry[group] = { ...(entry[group] ?? {}), [leaf]: value };
      layers[idx] = entry as LayerPatch;
      this.pending.layers = layers;
    } else if (parts[0] === "calibration") {
      this.pending.calibration = {
        ...(this.pending.calibration ?? {}),
        [parts[1]]: value,
      } as ConfigPatch["calibration"];
    } else if (parts[0] === "tone") {
      const tone = this.store.get().config.tone;
      this.pending.tone = tone ? { ...tone } : null;
    } else {
      (this.pending as Record<string, unknown>)[parts[0]] = value;
    }
  }

  /** Send the accumulated patch now (the debounce timer calls this). */
  async flush(): Promise<void> {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
    const id = this.store.get().sessionId;
    if (!id || Object.keys(this.pending).length === 0) return;
    const patch = this.pending;
    this.pending = {};
    try {
      const { invalidated } = await this.api.patchParams(id, patch);
      await this.refreshInvalidated(invalidated);
    } catch (err) {
      if (err instanceof ServiceError && err.payload.field) {
        const validation = { ...this.store.get().validation };
        validation[err.payload.field.replace(/\[(\d)\]/g, ".$1")] =
          err.payload.reason ?? err.payload.error;
        this.store.update({ validation });
      } else {
        throw err;
      }
    }
  }

  // -- refresh machinery ----------------------------------------------------

  private paneMatches(
    pane: { stage: StageName; layer: LayerName | null },
    entry: InvalidatedStage,
  ): boolean {
    if (entry.stage !== pane.stage) return false;
    if (entry.layer === null || pane.layer === null) return true;
    return entry.layer === pane.layer;
  }

  /** Refresh exactly the displayed surfaces the service reported as
   * invalidated; everything else keeps its cache and its digest tag. */
  async refreshInvalidated(invalidated: InvalidatedStage[]): Promise<void> {
    const state = this.store.get();
    const jobs: Promise<void>[] = [];
    if (invalidated.some((e) => this.paneMatches(state.left, e))) {
      jobs.push(this.refreshPane("left"));
    }
    if (invalidated.some((e) => this.paneMatches(state.right, e))) {
      jobs.push(this.refreshPane("right"));
    }
    if (invalidated.some((e) => e.stage === "analysis")) {
      jobs.push(this.refreshResult());
    }
    await Promise.all(jobs);
  }

  async selectStage(stage: StageName, layer: LayerName | null): Promise<void> {
    const usableLayer = (LAYER_STAGES as readonly string[]).includes(stage) ? layer : null;
    // the pane now shows different content: drop the old tag so the
    // refresh cannot be skipped as already-fresh
    this.store.updatePane("left", {
      stage,
      layer: usableLayer,
      digest: null,
      url: null,
      error: null,
    });
    await this.refreshPane("left");
  }

  async refreshPane(which: "left" | "right"): Promise<void> {
    const state = this.store.get();
    const id = state.sessionId;
    if (!id) return;
    const pane = state[which];
    const digest = this.store.formDigest();
    if (pane.digest === digest && pane.url !== null && pane.error === null) return;
    const key = `${which}:${pane.stage}:${pane.layer ?? ""}`;
    if (this.inflight.get(key) === digest) return; // single flight per target
    this.inflight.set(key, digest);
    this.store.updatePane(which, { loading: true });
    try {
      const blob = await this.api.fetchStage(id, pane.stage, pane.layer);
      if (this.store.formDigest() !== digest) return; // superseded edit
      this.store.updatePane(which, {
        url: this.urlFor(blob),
        digest,
        loading: false,
        error: null,
      });
    } catch (err) {
      if (err instanceof ServiceError) {
        this.store.updatePane(which, {
          url: null,
          digest,
          loading: false,
          error: err.payload,
        });
      } else {
        this.store.updatePane(which, { loading: false });
        throw err;
      }
    } finally {
      if (this.inflight.get(key) === digest) this.inflight.delete(key);
    }
  }

  async refreshResult(): Promise<void> {
    const id = this.store.get().sessionId;
    if (!id) return;
    const digest = this.store.formDigest();
    if (
      this.store.get().result.digest === digest &&
      this.store.get().result.data !== null
    ) {
      return;
    }
    this.store.updateResult({ loading: true });
    try {
      const data = await this.api.fetchResult(id);
      if (this.store.formDigest() !== digest) return;
      this.store.updateResult({ data, digest, loading: false, error: null });
    } catch (err) {
      if (err instanceof ServiceError) {
        this.store.updateResult({ data: null, digest, loading: false, error: err.payload });
      } else {
        this.store.updateResult({ loading: false });
        throw err;
      }
    }
  }
}

function assignPath(doc: ConfigDoc, path: string, value: unknown): void {
  const parts = path.split(".");
  let node: Record<string, unknown> = doc as unknown as Record<string, unknown>;
  for (const part of parts.slice(0, -1)) {
    node = node[part] as Record<string, unknown>;
  }
  node[parts[parts.length - 1]] = value as never;
}

function structuredClonePolyfill<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}
