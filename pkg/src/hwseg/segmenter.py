"""Adaptive text-line segmentation.

Pipeline: binarize, label connected components, drop blobs outside the
area range, estimate the text height from the page size, chain components
whose vertical centers are within a pixel tolerance, check each chain's
height against the text height, and finally drop strips whose ink density
is too low.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ccl import DEFAULT_AREA_MIN, BBox, Component, filter_by_area, label_components
from .raster import BinaryMask, GrayImage, binarize

REASON_BELOW = "below height range"
REASON_ABOVE = "above height range"
REASON_INK = "ink fraction below threshold"


@dataclass(frozen=True)
class SegParams:
    alignment_tolerance: int = 15
    area_min: int = DEFAULT_AREA_MIN
    area_max: Optional[int] = None
    min_height_factor: float = 0.5
    max_height_factor: float = 3.0
    min_ink_fraction: float = 0.30

    def __post_init__(self):
        if self.alignment_tolerance < 1:
            raise ValueError(f"alignment_tolerance must be >= 1, got {self.alignment_tolerance}")
        if self.area_min < 1:
            raise ValueError(f"area_min must be >= 1, got {self.area_min}")
        if self.area_max is not None and self.area_max < self.area_min:
            raise ValueError(f"area_min ({self.area_min}) > area_max ({self.area_max})")
        if not 0 < self.min_height_factor <= self.max_height_factor:
            raise ValueError(
                "height factors must satisfy 0 < min_height_factor <= max_height_factor, "
                f"got {self.min_height_factor}, {self.max_height_factor}"
            )
        if not 0 <= self.min_ink_fraction <= 1:
            raise ValueError(f"min_ink_fraction must be in [0, 1], got {self.min_ink_fraction}")

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class LineCandidate:
    member_ids: Tuple[int, ...]
    strip: BBox
    ink_fraction: Optional[float] = None
    reason: Optional[str] = None


@dataclass(frozen=True)
class TextLine:
    index: int
    strip: BBox
    member_ids: Tuple[int, ...]


@dataclass
class SegmentationResult:
    lines: List[TextLine]
    text_height: float
    params: SegParams
    discarded: List[LineCandidate] = field(default_factory=list)
    image: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            "image": self.image,
            "text_height": self.text_height,
            "params": self.params.to_dict(),
            "lines": [
                {"index": ln.index, "bbox": ln.strip.as_xyxy(), "components": list(ln.member_ids)}
                for ln in self.lines
            ],
            "discarded": [{"bbox": c.strip.as_xyxy(), "reason": c.reason} for c in self.discarded],
        }

    @classmethod
    def from_dict(cls, doc: Dict) -> "SegmentationResult":
        params = SegParams(**doc["params"])
        lines = [
            TextLine(int(ln["index"]), BBox.from_xyxy(ln["bbox"]), tuple(ln.get("components", ())))
            for ln in doc["lines"]
        ]
        discarded = [
            LineCandidate((), BBox.from_xyxy(d["bbox"]), reason=d.get("reason"))
            for d in doc.get("discarded", [])
        ]
        return cls(lines, float(doc["text_height"]), params, discarded, doc.get("image"))


def text_height(image_width: float, image_height: float) -> float:
    """Characteristic text height from the page size: ``hypot(w / 2, h) / 24``."""
    if image_width < 0 or image_height < 0:
        raise ValueError("image dimensions must be non-negative")
    if image_width == 0 and image_height == 0:
        raise ValueError("image width and height are both zero")
    return math.hypot(image_width / 2, image_height) / 24


def align_components(components: Sequence[Component], tolerance: float) -> List[List[Component]]:
    """Single-link clustering of components on their vertical centers.

    In one dimension the connected components of the "centers within
    ``tolerance``" graph are the maximal runs of the sorted centers whose
    consecutive gaps are all within the tolerance.
    """
    if tolerance < 1:
        raise ValueError(f"tolerance must be >= 1, got {tolerance}")
    if not components:
        return []
    ordered = sorted(components, key=lambda c: (c.center_y, c.id))
    clusters = [[ordered[0]]]
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.center_y - prev.center_y <= tolerance:
            clusters[-1].append(cur)
        else:
            clusters.append([cur])
    for cl in clusters:
        cl.sort(key=lambda c: c.id)
    clusters.sort(key=lambda cl: (min(c.bbox.y_min for c in cl), min(c.bbox.x_min for c in cl)))
    return clusters


def _candidate(cluster: Sequence[Component], reason: Optional[str] = None) -> LineCandidate:
    return LineCandidate(
        member_ids=tuple(c.id for c in cluster),
        strip=BBox.enclosing(c.bbox for c in cluster),
        reason=reason,
    )


def validate_lines(clusters: Sequence[Sequence[Component]], height_text: float,
                   params: SegParams) -> Tuple[List[LineCandidate], List[LineCandidate]]:
    """Keep clusters whose strip height is within the allowed text-height band.

    A cluster taller than the band is re-clustered once at half the
    alignment tolerance, since it usually holds several merged lines; the
    pieces are then checked without further splitting.
    """
    if height_text <= 0:
        raise ValueError(f"height_text must be positive, got {height_text}")
    lo = params.min_height_factor * height_text
    hi = params.max_height_factor * height_text
    split_tol = max(1, params.alignment_tolerance // 2)

    accepted: List[LineCandidate] = []
    discarded: List[LineCandidate] = []

    def check(cluster, may_split):
        strip_h = BBox.enclosing(c.bbox for c in cluster).height
        if strip_h < lo:
            discarded.append(_candidate(cluster, REASON_BELOW))
        elif strip_h <= hi:
            accepted.append(_candidate(cluster))
        elif may_split:
            for piece in align_components(cluster, split_tol):
                check(piece, False)
        else:
            discarded.append(_candidate(cluster, REASON_ABOVE))

    for cluster in clusters:
        if cluster:
            check(cluster, True)
    return accepted, discarded


def ink_fraction(mask: BinaryMask, strip: BBox) -> float:
    if not strip.within(mask.width, mask.height):
        raise ValueError(f"strip {strip.as_xyxy()} outside {mask.width}x{mask.height} mask")
    window = mask.foreground[strip.y_min : strip.y_max + 1, strip.x_min : strip.x_max + 1]
    return int(np.count_nonzero(window)) / strip.area


def postfilter(candidates: Sequence[LineCandidate], mask: BinaryMask,
               min_ink_fraction: float) -> Tuple[List[LineCandidate], List[LineCandidate]]:
    """Drop strips where ink covers less than ``min_ink_fraction`` of the area."""
    accepted, discarded = [], []
    for cand in candidates:
        frac = ink_fraction(mask, cand.strip)
        if frac >= min_ink_fraction:
            accepted.append(replace(cand, ink_fraction=frac))
        else:
            discarded.append(replace(cand, ink_fraction=frac, reason=REASON_INK))
    return accepted, discarded


def order_lines(candidates: Sequence[LineCandidate]) -> List[TextLine]:
    ordered = sorted(candidates, key=lambda c: (c.strip.y_min, c.strip.x_min, c.member_ids))
    return [TextLine(i, c.strip, c.member_ids) for i, c in enumerate(ordered)]


def segment_mask(mask: BinaryMask, params: SegParams = SegParams()) -> SegmentationResult:
    _, components = label_components(mask)
    kept = filter_by_area(components, params.area_min, params.area_max)
    height_text = text_height(mask.width, mask.height)
    clusters = align_components(kept, params.alignment_tolerance)
    candidates, rejected = validate_lines(clusters, height_text, params)
    lines, sparse = postfilter(candidates, mask, params.min_ink_fraction)
    return SegmentationResult(
        lines=order_lines(lines),
        text_height=height_text,
        params=params,
        discarded=rejected + sparse,
    )


def segment_page(img: GrayImage, params: SegParams = SegParams(),
                 name: Optional[str] = None) -> SegmentationResult:
    result = segment_mask(binarize(img), params)
    result.image = name
    return result
