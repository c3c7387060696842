"""Adaptive text-line segmentation for handwritten page images."""
from .ccl import BBox, Component, LabelMap, filter_by_area, label_components
from .evaluation import (
    MatchReport,
    MatchTable,
    Region,
    RegionSet,
    classify_matches,
    count_accuracy,
    detection_rate,
    evaluate,
    match_score,
)
from .raster import (
    BinaryMask,
    DecodeError,
    GrayImage,
    ImageStats,
    binarize,
    compute_stats,
    load_gray,
    read_image,
)
from .segmenter import (
    LineCandidate,
    SegmentationResult,
    SegParams,
    TextLine,
    align_components,
    postfilter,
    segment_page,
    text_height,
    validate_lines,
)
from .synthgen import GroundTruth, PageSpec, generate

__version__ = "0.1.0"
