// Slider bounds mirror the ranges the tuning service accepts as usable;
// the contract test asserts values inside these bounds never 422.
export const SLIDER_BOUNDS = {
  sigma_s: { min: 1, max: 20, step: 0.5 },
  sigma_r: { min: 1, max: 10, step: 0.5 },
  strel_radius: { min: 10, max: 30, step: 1 },
  convex_threshold: { min: 0.6, max: 0.75, step: 0.01 },
  small_threshold: { min: 0.01, max: 1.0, step: 0.01 },
  large_threshold: { min: 1.0, max: 12.0, step: 0.01 },
} as const;

export type BoundedParam = keyof typeof SLIDER_BOUNDS;

// One PATCH per deliberate adjustment, not one per slider tick.
export const DEBOUNCE_MS = 250;

export const STAGES = [
  "gray",
  "tone",
  "filtered",
  "opened_closed",
  "markers",
  "gradient",
  "labels",
  "overlay",
] as const;

// stages that take a ?layer= query
export const LAYER_STAGES = ["filtered", "opened_closed", "markers", "gradient"] as const;

export const LAYERS = ["top", "middle", "bottom"] as const;

// guidance shown on conflict cards, keyed by the service's error name
export const ERROR_GUIDANCE: Record<string, string> = {
  EmptyMarkers: "No foreground markers: reduce the strel radius.",
  DegenerateHistogram: "Layer is flat: adjust tone or pick another image.",
  NoSeeds: "No markers at all: relax the marker parameters.",
};

export interface LegendBand {
  name: string;
  css: string;
  meaning: string;
}

// result-panel legend: fine, typical, oversize, degraded zones
export const LEGEND_BANDS: LegendBand[] = [
  { name: "small", css: "linear-gradient(to right, #007314, #80ff80)", meaning: "fine, under 3/4 in." },
  { name: "typical", css: "linear-gradient(to right, #ffff00, #ff0000, #663300)", meaning: "typical ballast" },
  { name: "large", css: "linear-gradient(to right, #99ccff, #000080)", meaning: "oversize, over 3 in." },
  { name: "degraded", css: "#8c008c", meaning: "degraded zone (failed convexity)" },
];
