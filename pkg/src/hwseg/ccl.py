"""8-connected component labeling and region features (area, bounding box).

Labeling works on horizontal runs rather than single pixels: pass one
extracts the runs of every row and links each run to the runs of the row
above that touch it under 8-adjacency (column ranges overlapping after
widening by one pixel); the links are merged with a union-find.  Pass two
assigns final ids in raster order of first encounter and paints them back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .raster import BinaryMask

DEFAULT_AREA_MIN = 15


@dataclass(frozen=True)
class BBox:
    """Inclusive, 0-based pixel rectangle."""

    x_min: int
    x_max: int
    y_min: int
    y_max: int

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate bbox {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def center_y(self) -> float:
        return (self.y_min + self.y_max) / 2

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.x_min, other.x_min),
            max(self.x_max, other.x_max),
            min(self.y_min, other.y_min),
            max(self.y_max, other.y_max),
        )

    def contains(self, other: "BBox") -> bool:
        return (
            self.x_min <= other.x_min
            and other.x_max <= self.x_max
            and self.y_min <= other.y_min
            and other.y_max <= self.y_max
        )

    def within(self, width: int, height: int) -> bool:
        return self.x_min >= 0 and self.y_min >= 0 and self.x_max < width and self.y_max < height

    def as_xyxy(self) -> List[int]:
        """``[x_min, y_min, x_max, y_max]`` as used in the JSON formats."""
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @classmethod
    def from_xyxy(cls, box) -> "BBox":
        x0, y0, x1, y1 = (int(v) for v in box)
        return cls(x0, x1, y0, y1)

    @classmethod
    def enclosing(cls, boxes: Iterable["BBox"]) -> "BBox":
        it = iter(boxes)
        out = next(it)
        for b in it:
            out = out.union(b)
        return out


@dataclass(frozen=True)
class Component:
    id: int
    area: int
    bbox: BBox

    @property
    def center_y(self) -> float:
        return self.bbox.center_y


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel component ids, ``(height, width)`` int32; 0 is background."""

    label: np.ndarray

    @property
    def width(self) -> int:
        return self.label.shape[1]

    @property
    def height(self) -> int:
        return self.label.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return bool(np.array_equal(self.label, other.label))


class DisjointSet:
    """Union-find over ``0..n-1`` with path halving; roots are the smallest member."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra = self.find(a)
        rb = self.find(b)
        if ra < rb:
            self.parent[rb] = ra
        elif rb < ra:
            self.parent[ra] = rb

    def roots(self) -> np.ndarray:
        return np.fromiter((self.find(i) for i in range(len(self.parent))), dtype=np.int64,
                           count=len(self.parent))


def _runs(fg: np.ndarray):
    """Row-major horizontal runs: (row, start, end_inclusive) arrays."""
    h, w = fg.shape
    padded = np.zeros((h, w + 2), dtype=np.int8)
    padded[:, 1:-1] = fg
    d = np.diff(padded, axis=1)
    rows, starts = np.nonzero(d == 1)
    _, stops = np.nonzero(d == -1)
    return rows.astype(np.int64), starts.astype(np.int64), stops.astype(np.int64) - 1


def _run_links(rows, starts, ends, width):
    """Pairs (a, b) of run indices where run a in row r-1 touches run b in row r."""
    stride = width + 3
    start_key = rows * stride + starts
    end_key = rows * stride + ends
    lo = np.searchsorted(end_key, (rows - 1) * stride + starts - 1, side="left")
    hi = np.searchsorted(start_key, (rows - 1) * stride + ends + 1, side="right")
    counts = np.maximum(hi - lo, 0)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    b = np.repeat(np.arange(rows.size), counts)
    offsets = np.cumsum(counts) - counts
    a = np.repeat(lo, counts) + (np.arange(total) - np.repeat(offsets, counts))
    return a, b


def label_components(mask: BinaryMask) -> Tuple[LabelMap, List[Component]]:
    """Label 8-connected foreground regions.

    Ids run from 1 in raster order of each component's first pixel, so the
    output depends only on the mask.
    """
    fg = mask.foreground
    h, w = fg.shape
    label = np.zeros((h, w), dtype=np.int32)
    rows, starts, ends = _runs(fg)
    if rows.size == 0:
        return LabelMap(label), []

    a, b = _run_links(rows, starts, ends, w)
    ds = DisjointSet(rows.size)
    for i, j in zip(a.tolist(), b.tolist()):
        ds.union(i, j)
    roots = ds.roots()

    # roots are minimal run indices, and runs are in raster order, so
    # ranking the distinct roots gives first-encounter numbering
    uniq, run_label = np.unique(roots, return_inverse=True)
    run_label = run_label.astype(np.int64) + 1
    n = uniq.size

    lengths = ends - starts + 1
    label.ravel()[np.flatnonzero(fg)] = np.repeat(run_label, lengths)

    area = np.bincount(run_label, weights=lengths, minlength=n + 1)[1:].astype(np.int64)
    x_min = np.full(n + 1, w, dtype=np.int64)
    x_max = np.full(n + 1, -1, dtype=np.int64)
    y_min = np.full(n + 1, h, dtype=np.int64)
    y_max = np.full(n + 1, -1, dtype=np.int64)
    np.minimum.at(x_min, run_label, starts)
    np.maximum.at(x_max, run_label, ends)
    np.minimum.at(y_min, run_label, rows)
    np.maximum.at(y_max, run_label, rows)

    components = [
        Component(k, int(area[k - 1]), BBox(int(x_min[k]), int(x_max[k]), int(y_min[k]), int(y_max[k])))
        for k in range(1, n + 1)
    ]
    return LabelMap(label), components


def filter_by_area(components: List[Component], a_min: int = DEFAULT_AREA_MIN,
                   a_max: Optional[int] = None) -> List[Component]:
    """Keep components with ``a_min <= area <= a_max`` (``a_max=None``: unbounded)."""
    if a_min < 1:
        raise ValueError(f"a_min must be >= 1, got {a_min}")
    if a_max is not None and a_max < a_min:
        raise ValueError(f"a_min ({a_min}) > a_max ({a_max})")
    return [c for c in components if c.area >= a_min and (a_max is None or c.area <= a_max)]


def labels_to_pgm(labels: LabelMap) -> bytes:
    """Debug rendering: label k -> (k mod 255) + 1, background 0."""
    from .raster import encode_pgm

    lab = labels.label.astype(np.int64)
    out = np.where(lab > 0, lab % 255 + 1, 0).astype(np.uint8)
    return encode_pgm(out)
