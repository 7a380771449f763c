export type LayerName = "top" | "middle" | "bottom";
export type StageName =
  | "gray"
  | "tone"
  | "filtered"
  | "opened_closed"
  | "markers"
  | "gradient"
  | "labels"
  | "overlay";
export type Mode = "stitched" | "averaged";

export interface BilateralDoc {
  sigma_s: number;
  sigma_r: number;
}

export interface SegDoc {
  strel_radius: number;
  min_marker_area: number;
}

export interface LayerDoc {
  bilateral: BilateralDoc;
  seg: SegDoc;
}

export interface CalibrationDoc {
  ball_area_px: number;
  convex_threshold: number;
  small_threshold: number;
  large_threshold: number;
}

export interface ConfigDoc {
  mode: Mode;
  tone: { gamma: number; brightness_gain: number } | null;
  reference_image: string | null;
  layers: [LayerDoc, LayerDoc, LayerDoc];
  calibration: CalibrationDoc;
}

/** Partial config for PATCH bodies: layers merge element-wise, null
 * leaves a layer untouched. */
export interface ConfigPatch {
  mode?: Mode;
  tone?: { gamma: number; brightness_gain: number } | null;
  reference_image?: string | null;
  layers?: [LayerPatch | null, LayerPatch | null, LayerPatch | null];
  calibration?: Partial<CalibrationDoc>;
}

export interface LayerPatch {
  bilateral?: Partial<BilateralDoc>;
  seg?: Partial<SegDoc>;
}

export interface InvalidatedStage {
  stage: string;
  layer: LayerName | null;
}

export interface SessionInfo {
  id: string;
  width: number;
  height: number;
}

export interface SegmentDoc {
  label: number;
  area_px: number;
  hull_area_px: number;
  convexity: number;
  r: number;
  category: "small" | "typical" | "large" | "convex_fail";
  color_index: number;
}

export interface ResultDoc {
  image_area_px: number;
  mode: Mode;
  params_digest: string;
  pds_percent: number;
  final_pds: number;
  per_layer_pds: [number, number, number] | null;
  typical_area_px: number;
  category_counts: Record<string, number>;
  category_areas: Record<string, number>;
  segments: SegmentDoc[];
}

export interface StageError {
  error: string;
  layer?: string;
  field?: string;
  reason?: string;
}

/** The service client surface the controller depends on; tests provide
 * a scripted implementation. */
export interface ServiceApi {
  createSession(file: Blob, name: string): Promise<SessionInfo>;
  patchParams(id: string, patch: ConfigPatch): Promise<{ invalidated: InvalidatedStage[] }>;
  fetchStage(id: string, stage: StageName, layer: LayerName | null): Promise<Blob>;
  fetchResult(id: string): Promise<ResultDoc>;
  deleteSession(id: string): Promise<void>;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public payload: StageError,
  ) {
    super(`${status}: ${payload.error}`);
  }
}
