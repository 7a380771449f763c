import { configDigest } from "./digest.js";
import type {
  ConfigDoc,
  LayerName,
  ResultDoc,
  StageError,
  StageName,
} from "./types.js";

export interface PaneState {
  stage: StageName;
  layer: LayerName | null;
  /** digest of the config the displayed image was computed from */
  digest: string | null;
  url: string | null;
  loading: boolean;
  error: StageError | null;
}

export interface ResultState {
  digest: string | null;
  data: ResultDoc | null;
  loading: boolean;
  error: StageError | null;
}

export type ComparisonMode = "side-by-side" | "overlay-blend";

export interface UiState {
  sessionId: string | null;
  imageWidth: number;
  imageHeight: number;
  config: ConfigDoc;
  comparison: ComparisonMode;
  left: PaneState;
  right: PaneState;
  result: ResultState;
  validation: Record<string, string>;
}

export function defaultConfig(): ConfigDoc {
  const topMid = () => ({
    bilateral: { sigma_s: 6, sigma_r: 8 },
    seg: { strel_radius: 14, min_marker_area: 20 },
  });
  return {
    mode: "stitched",
    tone: null,
    reference_image: null,
    layers: [
      topMid(),
      topMid(),
      { bilateral: { sigma_s: 8, sigma_r: 10 }, seg: { strel_radius: 14, min_marker_area: 20 } },
    ],
    calibration: {
      ball_area_px: 5000,
      convex_threshold: 0.73,
      small_threshold: 0.11,
      large_threshold: 7.069,
    },
  };
}

function initialState(): UiState {
  return {
    sessionId: null,
    imageWidth: 0,
    imageHeight: 0,
    config: defaultConfig(),
    comparison: "side-by-side",
    left: { stage: "gray", layer: null, digest: null, url: null, loading: false, error: null },
    right: { stage: "overlay", layer: null, digest: null, url: null, loading: false, error: null },
    result: { digest: null, data: null, loading: false, error: null },
    validation: {},
  };
}

type Listener = (state: UiState) => void;

export class Store {
  private state: UiState = initialState();
  private listeners: Listener[] = [];

  get(): UiState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  update(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  updatePane(which: "left" | "right", patch: Partial<PaneState>): void {
    this.update({ [which]: { ...this.state[which], ...patch } } as Partial<UiState>);
  }

  updateResult(patch: Partial<ResultState>): void {
    this.update({ result: { ...this.state.result, ...patch } });
  }

  reset(): void {
    this.state = initialState();
    for (const fn of this.listeners) fn(this.state);
  }

  /** digest of the current form state */
  formDigest(): string {
    return configDigest(this.state.config);
  }

  /** a pane (or the result) is stale when its content digest differs
   * from the current form digest */
  isStale(digest: string | null): boolean {
    return digest !== this.formDigest();
  }
}
