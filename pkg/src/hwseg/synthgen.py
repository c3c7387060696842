"""Synthetic handwriting-like pages with pixel-exact line ground truth.

Each text line is a horizontal band of overlapping filled ellipses with
short thick polyline strokes on top, shifted vertically by up to
``jitter`` pixels per blob.  The first blob of every line spans the full
band height, so at zero jitter a line's ink is exactly ``line_height``
rows tall.  Every ink pixel belongs to exactly one line; where blobs of
different lines would collide the earlier line keeps the pixel.

All randomness comes from :class:`hwseg.pcg.PCG32`, so a spec (seed
included) always renders to the same bytes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .ccl import BBox
from .pcg import PCG32
from .raster import GrayImage


@dataclass(frozen=True)
class PageSpec:
    width: int = 1240
    height: int = 1754
    line_count: int = 10
    line_height: int = 60
    line_gap: int = 60
    jitter: int = 4
    blob_count_per_line: int = 30
    blob_size_range: Tuple[int, int] = (28, 60)
    ink_intensity_range: Tuple[int, int] = (10, 80)
    background_intensity: int = 235
    rng_seed: int = 0
    stroke_probability: float = 0.5
    preset: Optional[str] = None

    def validate(self) -> None:
        def bad(msg):
            raise ValueError(f"infeasible page spec: {msg}")

        if self.width < 1 or self.height < 1:
            bad(f"width and height must be >= 1 (got {self.width}x{self.height})")
        if self.line_count < 0:
            bad("line_count must be >= 0")
        if self.line_count >= 1:
            if self.line_height < 1:
                bad("line_height must be >= 1")
            if self.line_gap < 0:
                bad("line_gap must be >= 0")
            need = self.line_count * self.line_height + (self.line_count - 1) * self.line_gap
            if need > self.height:
                bad(f"line_count*line_height + (line_count-1)*line_gap = {need} exceeds height {self.height}")
            if self.blob_count_per_line < 1:
                bad("blob_count_per_line must be >= 1")
        if self.line_count > 255:
            bad("line_count must be <= 255 (label-map ground truth is 8-bit)")
        if self.jitter < 0:
            bad("jitter must be >= 0")
        lo, hi = self.blob_size_range
        if not 1 <= lo <= hi:
            bad(f"blob_size_range must satisfy 1 <= min <= max (got {self.blob_size_range})")
        ink_lo, ink_hi = self.ink_intensity_range
        if not 0 <= ink_lo <= ink_hi <= 255:
            bad(f"ink_intensity_range must satisfy 0 <= lo <= hi <= 255 (got {self.ink_intensity_range})")
        if not 0 <= self.background_intensity <= 255:
            bad("background_intensity must be in [0, 255]")
        if ink_hi >= self.background_intensity:
            bad(
                f"ink_intensity_range.hi ({ink_hi}) must be below "
                f"background_intensity ({self.background_intensity})"
            )
        if not 0 <= self.stroke_probability <= 1:
            bad("stroke_probability must be in [0, 1]")

    def to_dict(self) -> Dict:
        doc = asdict(self)
        doc["blob_size_range"] = list(self.blob_size_range)
        doc["ink_intensity_range"] = list(self.ink_intensity_range)
        return doc

    @classmethod
    def from_dict(cls, doc: Dict) -> "PageSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown page spec field(s): {', '.join(sorted(unknown))}")
        kw = dict(doc)
        for key in ("blob_size_range", "ink_intensity_range"):
            if key in kw:
                kw[key] = tuple(int(v) for v in kw[key])
        return cls(**kw)


@dataclass(eq=False)
class GroundTruth:
    line_count: int
    label_map: np.ndarray
    line_bboxes: List[BBox]

    def to_dict(self) -> Dict:
        """Rectangle ground truth (count + one bbox per line)."""
        return {
            "line_count": self.line_count,
            "lines": [{"bbox": b.as_xyxy()} for b in self.line_bboxes],
        }


# ---------------------------------------------------------------------------
# rendering primitives


def _ellipse(h: int, w: int) -> np.ndarray:
    """Filled ellipse whose tight bounding box is exactly ``h`` x ``w``."""
    yy = (np.arange(h) + 0.5 - h / 2) / (h / 2)
    xx = (np.arange(w) + 0.5 - w / 2) / (w / 2)
    return yy[:, None] ** 2 + xx[None, :] ** 2 <= 1.0


def _polyline(h: int, w: int, points, thickness: float) -> np.ndarray:
    """Pixels within ``thickness / 2`` of a polyline, in an ``h`` x ``w`` box."""
    cy = np.arange(h)[:, None] + 0.5
    cx = np.arange(w)[None, :] + 0.5
    out = np.zeros((h, w), dtype=bool)
    r2 = (thickness / 2) ** 2
    for (y0, x0), (y1, x1) in zip(points, points[1:]):
        dy, dx = y1 - y0, x1 - x0
        L2 = dy * dy + dx * dx
        if L2 == 0:
            t = np.zeros((h, w))
        else:
            t = np.clip(((cy - y0) * dy + (cx - x0) * dx) / L2, 0.0, 1.0)
        py = y0 + t * dy
        px = x0 + t * dx
        out |= (cy - py) ** 2 + (cx - px) ** 2 <= r2
    return out


class _Canvas:
    def __init__(self, spec: PageSpec):
        self.img = np.full((spec.height, spec.width), spec.background_intensity, dtype=np.uint8)
        self.owner = np.zeros((spec.height, spec.width), dtype=np.uint8)

    def paint(self, top: int, left: int, shape: np.ndarray, line_id: int, intensity: int) -> None:
        H, W = self.img.shape
        h, w = shape.shape
        y0, x0 = max(top, 0), max(left, 0)
        y1, x1 = min(top + h, H), min(left + w, W)
        if y0 >= y1 or x0 >= x1:
            return
        sub = shape[y0 - top : y1 - top, x0 - left : x1 - left]
        own = self.owner[y0:y1, x0:x1]
        hit = sub & ((own == 0) | (own == line_id))
        own[hit] = line_id
        self.img[y0:y1, x0:x1][hit] = intensity


def _render_line(canvas: _Canvas, spec: PageSpec, rng: PCG32, line_id: int, band_top: int) -> None:
    lh = spec.line_height
    size_lo, size_hi = spec.blob_size_range
    h_lo, h_hi = min(size_lo, lh), min(size_hi, lh)
    margin = max(1, spec.width // 20)
    x = margin + rng.below(max(1, spec.width // 20))
    right = spec.width - margin
    word_left = rng.randint(3, 6)
    for b in range(spec.blob_count_per_line):
        h = lh if b == 0 else rng.randint(h_lo, h_hi)
        w = rng.randint(size_lo, size_hi)
        if b > 0 and x + w > right:
            break
        dy = rng.randint(-spec.jitter, spec.jitter) if spec.jitter else 0
        top = band_top + (lh - h) // 2 + dy
        ink = rng.randint(*spec.ink_intensity_range)
        canvas.paint(top, x, _ellipse(h, w), line_id, ink)

        if rng.random() < spec.stroke_probability:
            # stroke spans the band vertically (shifted like the blob), never taller than it
            sw = w + rng.randint(0, w // 2)
            stop = band_top + dy
            n_pts = rng.randint(2, 4)
            pts = [(rng.uniform(0, lh), rng.uniform(0, sw)) for _ in range(n_pts)]
            thickness = rng.uniform(2.0, 4.0)
            canvas.paint(stop, x, _polyline(lh, sw, pts, thickness), line_id, ink)

        x += max(1, int(w * rng.uniform(0.55, 0.9)))
        word_left -= 1
        if word_left == 0:
            x += int(lh * rng.uniform(0.15, 0.35))
            word_left = rng.randint(3, 6)


def generate(spec: PageSpec) -> Tuple[GrayImage, GroundTruth]:
    spec.validate()
    rng = PCG32(spec.rng_seed)
    canvas = _Canvas(spec)
    n = spec.line_count
    if n:
        block = n * spec.line_height + (n - 1) * spec.line_gap
        top = (spec.height - block) // 2
        for k in range(n):
            _render_line(canvas, spec, rng, k + 1, top + k * (spec.line_height + spec.line_gap))

    owner = canvas.owner
    boxes = []
    for k in range(1, n + 1):
        ys, xs = np.nonzero(owner == k)
        boxes.append(BBox(int(xs.min()), int(xs.max()), int(ys.min()), int(ys.max())))
    return GrayImage(canvas.img), GroundTruth(n, owner.copy(), boxes)


# ---------------------------------------------------------------------------
# presets and corpora

A4_150DPI = (1240, 1754)
A4_300DPI = (2480, 3508)


def _preset_a4_150(seed: int) -> PageSpec:
    return PageSpec(rng_seed=seed, preset="a4-150dpi")


def _preset_a4_300(seed: int) -> PageSpec:
    return PageSpec(
        width=A4_300DPI[0], height=A4_300DPI[1], line_count=15, line_height=120, line_gap=90,
        jitter=8, blob_count_per_line=40, blob_size_range=(56, 120), rng_seed=seed,
        preset="a4-300dpi",
    )


def _preset_wide_gaps(seed: int) -> PageSpec:
    return PageSpec(line_count=6, line_height=60, line_gap=200, jitter=6, rng_seed=seed,
                    preset="wide-gaps")


def _preset_sparse_short(seed: int) -> PageSpec:
    return PageSpec(line_count=8, line_height=55, line_gap=120, jitter=5, blob_count_per_line=5,
                    blob_size_range=(26, 55), rng_seed=seed, preset="sparse-short-lines")


PRESETS = {
    "a4-150dpi": _preset_a4_150,
    "a4-300dpi": _preset_a4_300,
    "wide-gaps": _preset_wide_gaps,
    "sparse-short-lines": _preset_sparse_short,
}


def preset(name: str, seed: int = 0) -> PageSpec:
    try:
        return PRESETS[name](seed)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


@dataclass(frozen=True)
class CorpusSpec:
    """Randomised page layouts; every page spec is drawn from one seeded stream."""

    count: int = 200
    seed: int = 1
    width: int = A4_150DPI[0]
    height: int = A4_150DPI[1]
    lines: Tuple[int, int] = (5, 15)
    line_height: Tuple[int, int] = (45, 70)
    jitter_max: int = 10
    line_gap_min: int = 40
    blobs_per_line: Tuple[int, int] = (8, 40)

    def to_dict(self) -> Dict:
        doc = asdict(self)
        for k in ("lines", "line_height", "blobs_per_line"):
            doc[k] = list(doc[k])
        return doc

    @classmethod
    def from_dict(cls, doc: Dict) -> "CorpusSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown corpus field(s): {', '.join(sorted(unknown))}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
        return cls(**kw)


def corpus_specs(corpus: CorpusSpec) -> List[PageSpec]:
    rng = PCG32(corpus.seed, stream=0x5EED)
    pages = []
    for _ in range(corpus.count):
        n = rng.randint(*corpus.lines)
        jitter = rng.randint(0, corpus.jitter_max)
        usable = corpus.height - 2 * (jitter + corpus.height // 40)
        lh_cap = (usable - corpus.line_gap_min * (n - 1)) // n
        lh_hi = min(corpus.line_height[1], lh_cap)
        lh_lo = min(corpus.line_height[0], lh_hi)
        lh = rng.randint(lh_lo, lh_hi)
        gap_cap = (usable - n * lh) // (n - 1) if n > 1 else corpus.line_gap_min
        gap = rng.randint(corpus.line_gap_min, max(corpus.line_gap_min, min(gap_cap, 3 * lh)))
        pages.append(
            PageSpec(
                width=corpus.width,
                height=corpus.height,
                line_count=n,
                line_height=lh,
                line_gap=gap,
                jitter=jitter,
                blob_count_per_line=rng.randint(*corpus.blobs_per_line),
                blob_size_range=(lh // 2, lh),
                rng_seed=rng.next_u32(),
            )
        )
    return pages
