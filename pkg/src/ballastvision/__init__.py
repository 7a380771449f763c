"""Ballast degradation scoring from cross-section images.

Pipeline: grayscale + optional tone correction, per-layer bilateral
filtering, reconstruction-based cleanup, marker-controlled watershed,
convexity screening, calibrated size classification, and the Percentage
of Degraded Segments (PDS) score, rendered through a 64-entry color size
coding key.
"""

from .analysis import (
    CalibrationConfig,
    DegradationReport,
    SegmentCategory,
    SegmentRecord,
    analyze_segments,
    classify_segment,
    compute_pds,
    convex_hull,
    convex_hull_area,
    convexity_ratio,
    extract_segments,
)
from .colorcode import (
    DEGRADED_ZONE,
    ColorKey,
    color_index,
    default_color_key,
    load_color_key,
    render_labels,
    save_color_key,
)
from .errors import (
    BallastError,
    ConfigError,
    CorruptImageError,
    DegenerateHistogramError,
    EmptyMarkersError,
    ImageTooSmallError,
    MarkerExceedsMaskError,
    MissingRecordError,
    NoSeedsError,
    PipelineLayerError,
    UnsupportedFormatError,
    WidthMismatchError,
)
from .image import (
    GrayImage,
    LayerBand,
    LayerIndex,
    RgbImage,
    load_image,
    save_png,
    split_layers,
    stitch_layers,
    to_grayscale,
)
from .morphology import (
    BinaryMask,
    DiskStrel,
    close_by_reconstruction,
    dilate,
    erode,
    open_by_reconstruction,
    reconstruct,
    regional_maxima,
)
from .pipeline import (
    LayerParams,
    PipelineComputation,
    PipelineConfig,
    ProcessingMode,
    config_digest,
    config_from_dict,
    config_to_dict,
    default_config,
    process,
    process_averaged,
    process_stitched,
)
from .preprocess import (
    BilateralParams,
    ParameterWarning,
    ToneParams,
    adjust_tone,
    bilateral_filter,
    histogram_match,
)
from .segmentation import (
    LabelMatrix,
    MarkerSet,
    SegParams,
    background_markers,
    foreground_markers,
    gradient_magnitude,
    impose_minima,
    otsu_threshold,
    segment_image,
    watershed,
)

__version__ = "0.1.0"
