"""End-to-end orchestration: per-layer parameterization, the
stitch-then-watershed workflow, the averaged per-layer workflow, and
report assembly.

``PipelineComputation`` is the single execution engine: it computes
named stages lazily, caches them, and invalidates downstream stages when
parameters change. Batch processing and the tuning service both run
through it, so their outputs are identical by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .analysis import (
    CalibrationConfig,
    DegradationReport,
    SegmentRecord,
    analyze_segments,
    compute_pds,
)
from .colorcode import ColorKey, default_color_key, render_labels
from .errors import BallastError, ConfigError, PipelineLayerError
from .image import (
    GrayImage,
    LayerBand,
    LayerIndex,
    RgbImage,
    layer_bands,
    load_image,
    to_grayscale,
)
from .morphology import BinaryMask, DiskStrel, close_by_reconstruction, open_by_reconstruction
from .preprocess import BilateralParams, ToneParams, adjust_tone, bilateral_filter, histogram_match
from .segmentation import (
    LabelMatrix,
    MarkerSet,
    SegParams,
    background_markers,
    foreground_markers,
    gradient_magnitude,
    impose_minima,
    particle_labels,
    watershed,
)

LAYERS = (LayerIndex.TOP, LayerIndex.MIDDLE, LayerIndex.BOTTOM)


class ProcessingMode(Enum):
    STITCHED = "stitched"
    AVERAGED = "averaged"


@dataclass(frozen=True)
class LayerParams:
    bilateral: BilateralParams
    seg: SegParams


@dataclass(frozen=True)
class PipelineConfig:
    layers: tuple[LayerParams, LayerParams, LayerParams]
    calibration: CalibrationConfig
    mode: ProcessingMode = ProcessingMode.STITCHED
    tone: ToneParams | None = None
    reference_image: str | None = None

    def __post_init__(self):
        if len(self.layers) != 3:
            raise ValueError("exactly three layers (top, middle, bottom) required")


# Preferred defaults: sigma (6, 8) for top/middle, (8, 10) for bottom,
# disk radius 14, convexity cutoff 0.73, size thresholds 0.11 / 7.069.
DEFAULT_BALL_AREA_PX = 5000.0


def default_config() -> PipelineConfig:
    top_mid = LayerParams(BilateralParams(6.0, 8.0), SegParams(14))
    bottom = LayerParams(BilateralParams(8.0, 10.0), SegParams(14))
    return PipelineConfig(
        layers=(top_mid, top_mid, bottom),
        calibration=CalibrationConfig(ball_area_px=DEFAULT_BALL_AREA_PX),
        mode=ProcessingMode.STITCHED,
        tone=None,
        reference_image=None,
    )


# --------------------------------------------------------------------------
# config <-> JSON document
# --------------------------------------------------------------------------

def config_to_dict(cfg: PipelineConfig) -> dict:
    return {
        "mode": cfg.mode.value,
        "tone": (
            None
            if cfg.tone is None
            else {"gamma": cfg.tone.gamma, "brightness_gain": cfg.tone.brightness_gain}
        ),
        "reference_image": cfg.reference_image,
        "layers": [
            {
                "bilateral": {"sigma_s": lp.bilateral.sigma_s, "sigma_r": lp.bilateral.sigma_r},
                "seg": {
                    "strel_radius": lp.seg.strel_radius,
                    "min_marker_area": lp.seg.min_marker_area,
                },
            }
            for lp in cfg.layers
        ],
        "calibration": {
            "ball_area_px": cfg.calibration.ball_area_px,
            "convex_threshold": cfg.calibration.convex_threshold,
            "small_threshold": cfg.calibration.small_threshold,
            "large_threshold": cfg.calibration.large_threshold,
        },
    }


def _need_number(doc: dict, key: str, path: str, positive: bool = True) -> float:
    if key not in doc:
        raise ConfigError(f"{path}.{key}", "missing required field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}.{key}", f"must be > 0, got {v!r}")
    return float(v)


def _check_extra(doc: dict, allowed: set[str], path: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown field")


def config_from_dict(doc: dict) -> PipelineConfig:
    """Build a validated config from a JSON document; raises ConfigError
    naming the offending field path."""
    if not isinstance(doc, dict):
        raise ConfigError("(root)", "config must be a JSON object")
    _check_extra(doc, {"mode", "tone", "reference_image", "layers", "calibration"}, "config")

    mode_raw = doc.get("mode", "stitched")
    try:
        mode = ProcessingMode(mode_raw)
    except ValueError:
        raise ConfigError("mode", f"must be 'stitched' or 'averaged', got {mode_raw!r}")

    tone_doc = doc.get("tone")
    tone = None
    if tone_doc is not None:
        if not isinstance(tone_doc, dict):
            raise ConfigError("tone", "must be an object or null")
        _check_extra(tone_doc, {"gamma", "brightness_gain"}, "tone")
        gain = 1.0
        if "brightness_gain" in tone_doc:
            gain = _need_number(tone_doc, "brightness_gain", "tone")
        tone = ToneParams(gamma=_need_number(tone_doc, "gamma", "tone"), brightness_gain=gain)

    ref = doc.get("reference_image")
    if ref is not None and not isinstance(ref, str):
        raise ConfigError("reference_image", "must be a path string or null")

    layers_doc = doc.get("layers")
    if layers_doc is None:
        layers_doc = config_to_dict(default_config())["layers"]
    if not isinstance(layers_doc, list) or len(layers_doc) != 3:
        raise ConfigError("layers", "must be a list of exactly 3 layer objects")
    layers = []
    for i, ld in enumerate(layers_doc):
        path = f"layers[{i}]"
        if not isinstance(ld, dict):
            raise ConfigError(path, "must be an object")
        _check_extra(ld, {"bilateral", "seg"}, path)
        bd = ld.get("bilateral", {})
        sd = ld.get("seg", {})
        if not isinstance(bd, dict):
            raise ConfigError(f"{path}.bilateral", "must be an object")
        if not isinstance(sd, dict):
            raise ConfigError(f"{path}.seg", "must be an object")
        _check_extra(bd, {"sigma_s", "sigma_r"}, f"{path}.bilateral")
        _check_extra(sd, {"strel_radius", "min_marker_area"}, f"{path}.seg")
        sigma_s = _need_number(bd, "sigma_s", f"{path}.bilateral")
        sigma_r = _need_number(bd, "sigma_r", f"{path}.bilateral")
        strel = _need_number(sd, "strel_radius", f"{path}.seg")
        if strel != int(strel) or strel < 1:
            raise ConfigError(f"{path}.seg.strel_radius", f"must be an integer >= 1, got {strel!r}")
        mma = sd.get("min_marker_area", 20)
        if isinstance(mma, bool) or not isinstance(mma, (int, float)) or mma != int(mma) or mma < 0:
            raise ConfigError(f"{path}.seg.min_marker_area", f"must be an integer >= 0, got {mma!r}")
        layers.append(
            LayerParams(BilateralParams(sigma_s, sigma_r), SegParams(int(strel), int(mma)))
        )

    cal_doc = doc.get("calibration", {})
    if not isinstance(cal_doc, dict):
        raise ConfigError("calibration", "must be an object")
    _check_extra(
        cal_doc,
        {"ball_area_px", "convex_threshold", "small_threshold", "large_threshold"},
        "calibration",
    )
    defaults = {
        "ball_area_px": DEFAULT_BALL_AREA_PX,
        "convex_threshold": 0.73,
        "small_threshold": 0.11,
        "large_threshold": 7.069,
    }
    merged = {**defaults, **cal_doc}
    cal_kwargs = {k: _need_number(merged, k, "calibration") for k in defaults}
    if not cal_kwargs["convex_threshold"] <= 1:
        raise ConfigError("calibration.convex_threshold", "must be in (0, 1]")
    if not cal_kwargs["small_threshold"] < cal_kwargs["large_threshold"]:
        raise ConfigError(
            "calibration.small_threshold", "must be below calibration.large_threshold"
        )
    calibration = CalibrationConfig(**cal_kwargs)

    return PipelineConfig(
        layers=tuple(layers),
        calibration=calibration,
        mode=mode,
        tone=tone,
        reference_image=ref,
    )


def merge_config_dicts(base: dict, patch: dict) -> dict:
    """Deep merge for partial updates: objects merge recursively, the
    layers list merges element-wise (null leaves a layer untouched), and
    scalars replace."""
    out = dict(base)
    for key, val in patch.items():
        if key == "layers" and isinstance(val, list) and isinstance(out.get(key), list):
            merged_layers = list(out[key])
            for i, item in enumerate(val[: len(merged_layers)]):
                if item is None:
                    continue
                if isinstance(item, dict) and isinstance(merged_layers[i], dict):
                    merged_layers[i] = merge_config_dicts(merged_layers[i], item)
                else:
                    merged_layers[i] = item
            out[key] = merged_layers
        elif isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config_dicts(out[key], val)
        else:
            out[key] = val
    return out


def changed_paths(old: dict, new: dict, prefix: str = "") -> list[str]:
    """Leaf paths whose values differ, in layers[i].field.name notation."""
    paths: list[str] = []
    keys = sorted(set(old) | set(new))
    for key in keys:
        a, b = old.get(key), new.get(key)
        here = f"{prefix}.{key}" if prefix else key
        if isinstance(a, dict) and isinstance(b, dict):
            paths.extend(changed_paths(a, b, here))
        elif isinstance(a, list) and isinstance(b, list) and len(a) == len(b):
            for i, (ai, bi) in enumerate(zip(a, b)):
                item_path = f"{here}[{i}]"
                if isinstance(ai, dict) and isinstance(bi, dict):
                    paths.extend(changed_paths(ai, bi, item_path))
                elif ai != bi:
                    paths.append(item_path)
        elif a != b:
            paths.append(here)
    return paths


def config_digest(cfg: PipelineConfig) -> str:
    """Stable hash of the configuration document."""
    doc = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# staged execution
# --------------------------------------------------------------------------

LAYER_STAGES = ("filtered", "opened_closed", "markers", "gradient", "relief")
GLOBAL_STAGES = ("gray", "tone", "labels", "analysis", "overlay")
# stages exposed to invalidation listings (relief is internal)
REPORTABLE_STAGES = (
    "tone",
    "filtered",
    "opened_closed",
    "markers",
    "gradient",
    "labels",
    "analysis",
    "overlay",
)

# children of each stage in the dependency graph; "*" spans all layers
_STAGE_CHILDREN: dict[str, tuple[str, ...]] = {
    "gray": ("tone",),
    "tone": ("filtered",),
    "filtered": ("opened_closed", "gradient"),
    "opened_closed": ("markers",),
    "markers": ("relief",),
    "gradient": ("relief",),
    "relief": ("labels",),
    "labels": ("analysis",),
    "analysis": ("overlay",),
    "overlay": (),
}

# earliest stage touched by each parameter path prefix
_PARAM_STAGE_PREFIXES: tuple[tuple[str, str], ...] = (
    ("tone", "tone"),
    ("reference_image", "tone"),
    ("mode", "labels"),
    ("calibration", "analysis"),
)


@dataclass(frozen=True, eq=False)
class LabelsResult:
    """Watershed output: the display matrix always covers the full image;
    per-layer matrices are kept in averaged mode."""

    display: LabelMatrix
    per_layer: tuple[LabelMatrix, LabelMatrix, LabelMatrix] | None


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    report: DegradationReport
    records: tuple[SegmentRecord, ...]


class PipelineComputation:
    """Lazy, cached, stage-addressable execution of the whole pipeline."""

    def __init__(self, image: RgbImage, config: PipelineConfig, key: ColorKey | None = None):
        self.image = image
        self._config = config
        self.key = key if key is not None else default_color_key()
        self._cache: dict[tuple[str, LayerIndex | None], object] = {}

    @property
    def config(self) -> PipelineConfig:
        return self._config

    # -- invalidation ------------------------------------------------------

    def cached_stages(self) -> list[str]:
        return sorted(
            f"{name}:{layer.value}" if layer else name for name, layer in self._cache
        )

    @staticmethod
    def _stages_for_paths(paths: list[str]) -> set[tuple[str, LayerIndex | None]]:
        hits: set[tuple[str, LayerIndex | None]] = set()
        for path in paths:
            for prefix, stage in _PARAM_STAGE_PREFIXES:
                if path == prefix or path.startswith(prefix + "."):
                    hits.add((stage, None))
                    break
            else:
                if path == "layers":
                    hits.update(("filtered", layer) for layer in LAYERS)
                elif path.startswith("layers["):
                    idx = int(path[len("layers[")])
                    layer = LAYERS[idx]
                    rest = path.split(".", 1)[1] if "." in path else ""
                    if rest.startswith("bilateral"):
                        hits.add(("filtered", layer))
                    elif rest.startswith("seg.strel_radius"):
                        hits.add(("opened_closed", layer))
                    elif rest.startswith("seg.min_marker_area"):
                        hits.add(("markers", layer))
                    else:
                        hits.add(("filtered", layer))
        return hits

    def _closure(
        self, roots: set[tuple[str, LayerIndex | None]]
    ) -> set[tuple[str, LayerIndex | None]]:
        out: set[tuple[str, LayerIndex | None]] = set()
        frontier = list(roots)
        while frontier:
            name, layer = frontier.pop()
            for child in _STAGE_CHILDREN[name]:
                child_layers: tuple[LayerIndex | None, ...]
                if child in LAYER_STAGES:
                    child_layers = (layer,) if layer is not None else LAYERS
                else:
                    child_layers = (None,)
                for cl in child_layers:
                    node = (child, cl)
                    if node not in out:
                        out.add(node)
                        frontier.append(node)
        return out | roots

    def update_config(self, new_config: PipelineConfig) -> list[dict]:
        """Swap the configuration, evict stale stages, and return the
        stage instances that will recompute (sorted, layer-qualified)."""
        paths = changed_paths(config_to_dict(self._config), config_to_dict(new_config))
        self._config = new_config
        roots = self._stages_for_paths(paths)
        invalid = self._closure(roots)
        for node in invalid:
            self._cache.pop(node, None)
        ordering = {name: i for i, name in enumerate(_STAGE_CHILDREN)}
        layer_order = {None: 0, LayerIndex.TOP: 1, LayerIndex.MIDDLE: 2, LayerIndex.BOTTOM: 3}
        listed = sorted(
            (n for n in invalid if n[0] in REPORTABLE_STAGES),
            key=lambda n: (ordering[n[0]], layer_order[n[1]]),
        )
        return [
            {"stage": name, "layer": layer.value if layer else None} for name, layer in listed
        ]

    # -- stage computation -------------------------------------------------

    def bands(self) -> tuple[LayerBand, LayerBand, LayerBand]:
        return layer_bands(self.image.height)

    def _layer_input(self, layer: LayerIndex) -> GrayImage:
        toned: GrayImage = self.stage("tone")  # type: ignore[assignment]
        band = self.bands()[LAYERS.index(layer)]
        return GrayImage(toned.pixels[band.row_start : band.row_end])

    def _layer_params(self, layer: LayerIndex) -> LayerParams:
        return self._config.layers[LAYERS.index(layer)]

    def stage(self, name: str, layer: LayerIndex | None = None):
        if name in LAYER_STAGES and layer is None:
            raise ValueError(f"stage {name!r} needs a layer")
        if name in GLOBAL_STAGES:
            layer = None
        node = (name, layer)
        if node in self._cache:
            return self._cache[node]
        value = self._compute(name, layer)
        self._cache[node] = value
        return value

    def _compute(self, name: str, layer: LayerIndex | None):
        if name == "gray":
            return to_grayscale(self.image)
        if name == "tone":
            gray: GrayImage = self.stage("gray")  # type: ignore[assignment]
            out = gray
            if self._config.tone is not None:
                out = adjust_tone(out, self._config.tone)
            if self._config.reference_image is not None:
                ref = to_grayscale(load_image(self._config.reference_image))
                out = histogram_match(out, ref)
            return out
        if name == "filtered":
            assert layer is not None
            return bilateral_filter(self._layer_input(layer), self._layer_params(layer).bilateral)
        if name == "opened_closed":
            assert layer is not None
            se = DiskStrel(self._layer_params(layer).seg.strel_radius)
            filtered: GrayImage = self.stage("filtered", layer)  # type: ignore[assignment]
            return close_by_reconstruction(open_by_reconstruction(filtered, se), se)
        if name == "markers":
            assert layer is not None
            prepared: GrayImage = self.stage("opened_closed", layer)  # type: ignore[assignment]
            seg = self._layer_params(layer).seg
            try:
                fg = foreground_markers(prepared, seg)
                bg = background_markers(prepared)
            except BallastError as exc:
                raise PipelineLayerError(layer.value, exc) from exc
            return MarkerSet(fg, BinaryMask(bg.bits & ~fg.bits))
        if name == "gradient":
            assert layer is not None
            filtered = self.stage("filtered", layer)
            return gradient_magnitude(filtered)  # type: ignore[arg-type]
        if name == "relief":
            assert layer is not None
            markers: MarkerSet = self.stage("markers", layer)  # type: ignore[assignment]
            grad: GrayImage = self.stage("gradient", layer)  # type: ignore[assignment]
            return impose_minima(grad, BinaryMask(markers.foreground.bits | markers.background.bits))
        if name == "labels":
            return self._compute_labels()
        if name == "analysis":
            return self._compute_analysis()
        if name == "overlay":
            analysis: AnalysisResult = self.stage("analysis")  # type: ignore[assignment]
            labels: LabelsResult = self.stage("labels")  # type: ignore[assignment]
            return render_labels(labels.display, analysis.records, self.key)
        raise ValueError(f"unknown stage {name!r}")

    def _compute_labels(self) -> LabelsResult:
        if self._config.mode is ProcessingMode.STITCHED:
            reliefs = []
            fgs = []
            bgs = []
            for layer in LAYERS:
                markers: MarkerSet = self.stage("markers", layer)  # type: ignore[assignment]
                relief: GrayImage = self.stage("relief", layer)  # type: ignore[assignment]
                reliefs.append(relief.pixels)
                fgs.append(markers.foreground.bits)
                bgs.append(markers.background.bits)
            relief_full = GrayImage(np.vstack(reliefs))
            # stitched masks: components touching the seam merge by
            # 8-adjacency when the full mask is relabeled
            seeds = MarkerSet(BinaryMask(np.vstack(fgs)), BinaryMask(np.vstack(bgs)))
            raw = watershed(relief_full, seeds)
            return LabelsResult(display=particle_labels(raw), per_layer=None)

        per_layer: list[LabelMatrix] = []
        for layer in LAYERS:
            markers = self.stage("markers", layer)
            relief = self.stage("relief", layer)
            try:
                raw = watershed(relief, markers)  # type: ignore[arg-type]
            except BallastError as exc:
                raise PipelineLayerError(layer.value, exc) from exc
            per_layer.append(particle_labels(raw))
        offset = 0
        blocks = []
        for mat in per_layer:
            block = mat.labels.copy()
            np.add(block, offset, out=block, where=block > 0)
            blocks.append(block)
            offset += int(mat.labels.max())
        display = LabelMatrix(np.vstack(blocks))
        return LabelsResult(display=display, per_layer=tuple(per_layer))

    def _compute_analysis(self) -> AnalysisResult:
        labels: LabelsResult = self.stage("labels")  # type: ignore[assignment]
        cal = self._config.calibration
        area_full = self.image.height * self.image.width
        digest = config_digest(self._config)

        if self._config.mode is ProcessingMode.STITCHED:
            records = analyze_segments(labels.display, cal)
            pds = compute_pds(records, area_full)
            report = DegradationReport(
                image_area_px=area_full,
                segments=tuple(records),
                typical_area_px=sum(
                    r.area_px for r in records if r.category.value == "typical"
                ),
                pds_percent=pds,
                final_pds=pds,
                per_layer_pds=None,
                mode=self._config.mode.value,
                params_digest=digest,
            )
            return AnalysisResult(report=report, records=tuple(records))

        assert labels.per_layer is not None
        per_layer_pds = []
        all_records: list[SegmentRecord] = []
        offset = 0
        for mat, band in zip(labels.per_layer, self.bands()):
            recs = analyze_segments(mat, cal)
            layer_area = band.height * self.image.width
            per_layer_pds.append(compute_pds(recs, layer_area))
            for rec in recs:
                all_records.append(replace(rec, label=rec.label + offset))
            offset += int(mat.labels.max())
        final = sum(per_layer_pds) / 3.0
        report = DegradationReport(
            image_area_px=area_full,
            segments=tuple(all_records),
            typical_area_px=sum(r.area_px for r in all_records if r.category.value == "typical"),
            pds_percent=compute_pds(all_records, area_full),
            final_pds=final,
            per_layer_pds=(per_layer_pds[0], per_layer_pds[1], per_layer_pds[2]),
            mode=self._config.mode.value,
            params_digest=digest,
        )
        return AnalysisResult(report=report, records=tuple(all_records))

    # -- top-level products ------------------------------------------------

    def report(self) -> DegradationReport:
        analysis: AnalysisResult = self.stage("analysis")  # type: ignore[assignment]
        return analysis.report

    def overlay(self) -> RgbImage:
        return self.stage("overlay")  # type: ignore[return-value]


def process(img: RgbImage, cfg: PipelineConfig) -> tuple[DegradationReport, RgbImage]:
    """Run the configured workflow and return the report and overlay."""
    comp = PipelineComputation(img, cfg)
    return comp.report(), comp.overlay()


def process_stitched(img: RgbImage, cfg: PipelineConfig) -> tuple[DegradationReport, RgbImage]:
    """One global watershed over the re-assembled per-layer reliefs."""
    if cfg.mode is not ProcessingMode.STITCHED:
        raise ValueError("config mode must be 'stitched'")
    return process(img, cfg)


def process_averaged(img: RgbImage, cfg: PipelineConfig) -> tuple[DegradationReport, RgbImage]:
    """Independent per-layer watersheds; the final score is the mean of
    the three per-layer scores."""
    if cfg.mode is not ProcessingMode.AVERAGED:
        raise ValueError("config mode must be 'averaged'")
    return process(img, cfg)
