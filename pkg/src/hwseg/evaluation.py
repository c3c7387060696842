"""Segmentation evaluation: MatchScore table, match classes, detection rate.

Regions are sets of foreground pixels, stored as sorted flat indices
(``y * width + x``) of the page they belong to.

Match classification works on the bipartite graph whose edges are the
(ground truth, detected) pairs scoring at or above the acceptance
threshold.  Each connected component of that graph is one kind of event:

* a single edge is a one-to-one match (``o2o``);
* one ground-truth region with several detected partners is ``o2m``;
* several ground-truth regions sharing one detected partner is ``m2o``.

A component with at least two regions on both sides contributes as many
events as its maximum matching has edges, all counted as ``o2m`` when the
component has at least as many detected as ground-truth regions and as
``m2o`` otherwise.  This keeps every region in exactly one category, bounds
the total by ``min(G, F)``, and makes the total non-increasing as the
threshold rises.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .ccl import BBox
from .raster import BinaryMask

DEFAULT_THRESHOLD = 0.95
DEFAULT_WEIGHTS = (1.0, 0.25, 0.25)

GROUND_TRUTH = "ground-truth"
DETECTED = "detected"


@dataclass(frozen=True, eq=False)
class Region:
    id: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.unique(np.asarray(self.pixels, dtype=np.int64))
        object.__setattr__(self, "pixels", px)

    def __len__(self):
        return int(self.pixels.size)


@dataclass
class RegionSet:
    regions: List[Region]
    source: str
    width: int
    height: int

    def __post_init__(self):
        if self.source not in (GROUND_TRUTH, DETECTED):
            raise ValueError(f"unknown region source {self.source!r}")
        n = self.width * self.height
        for r in self.regions:
            if r.pixels.size and (r.pixels[0] < 0 or r.pixels[-1] >= n):
                raise ValueError(f"region {r.id} has pixels outside the {self.width}x{self.height} page")

    def __len__(self):
        return len(self.regions)

    def overlapping_pixels(self) -> int:
        """Number of pixels claimed by more than one region."""
        if not self.regions:
            return 0
        allpx = np.concatenate([r.pixels for r in self.regions])
        return int(allpx.size - np.unique(allpx).size)

    @classmethod
    def from_label_map(cls, labels: np.ndarray, source: str = GROUND_TRUTH) -> "RegionSet":
        """One region per non-zero value of ``labels``, in increasing value order."""
        labels = np.asarray(labels)
        h, w = labels.shape
        flat = labels.ravel()
        nz = np.flatnonzero(flat)
        vals = flat[nz]
        order = np.argsort(vals, kind="stable")
        vals, nz = vals[order], nz[order]
        ids, starts = np.unique(vals, return_index=True)
        chunks = np.split(nz, starts[1:])
        return cls([Region(int(k), px) for k, px in zip(ids, chunks)], source, w, h)

    @classmethod
    def from_boxes(cls, boxes: Sequence[BBox], width: int, height: int,
                   mask: Optional[BinaryMask] = None, source: str = DETECTED) -> "RegionSet":
        """Rectangles, restricted to the mask's foreground when a mask is given."""
        regions = []
        for k, b in enumerate(boxes, start=1):
            y0, y1 = max(b.y_min, 0), min(b.y_max, height - 1)
            x0, x1 = max(b.x_min, 0), min(b.x_max, width - 1)
            ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
            ys, xs = ys.ravel(), xs.ravel()
            if mask is not None:
                keep = mask.foreground[ys, xs]
                ys, xs = ys[keep], xs[keep]
            regions.append(Region(k, ys * width + xs))
        return cls(regions, source, width, height)


@dataclass
class MatchTable:
    """``scores[j, i]``: MatchScore of ground-truth region j vs detected region i."""

    scores: np.ndarray

    @property
    def G(self) -> int:
        return self.scores.shape[0]

    @property
    def F(self) -> int:
        return self.scores.shape[1]


@dataclass
class MatchCounts:
    o2o: int = 0
    o2m: int = 0
    m2o: int = 0
    # detected-side views, informational only
    detected_o2m: int = 0
    detected_m2o: int = 0

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.o2o, self.o2m, self.m2o)


@dataclass
class MatchReport:
    G: int
    F: int
    o2o: int
    o2m: int
    m2o: int
    detection_rate: float
    threshold: float = DEFAULT_THRESHOLD
    weights: Tuple[float, float, float] = DEFAULT_WEIGHTS
    detected_o2m: int = 0
    detected_m2o: int = 0
    detected_overlap_pixels: int = 0
    table: Optional[MatchTable] = field(default=None, repr=False)

    def to_dict(self, verbose: bool = False) -> Dict:
        doc = {
            "G": self.G,
            "F": self.F,
            "o2o": self.o2o,
            "o2m": self.o2m,
            "m2o": self.m2o,
            "detection_rate": self.detection_rate,
            "threshold": self.threshold,
            "weights": list(self.weights),
            "detected_o2m": self.detected_o2m,
            "detected_m2o": self.detected_m2o,
            "detected_overlap_pixels": self.detected_overlap_pixels,
        }
        if verbose and self.table is not None:
            doc["scores"] = self.table.scores.tolist()
        return doc


def _as_pixels(region) -> np.ndarray:
    if isinstance(region, Region):
        return region.pixels
    if isinstance(region, (set, frozenset)):
        region = list(region)
    return np.unique(np.asarray(region, dtype=np.int64))


def match_score(gt_region, det_region) -> float:
    """Intersection over union of two pixel sets; 0 when both are empty."""
    a = _as_pixels(gt_region)
    b = _as_pixels(det_region)
    total = a.size + b.size
    if total == 0:
        return 0.0
    inter = np.intersect1d(a, b, assume_unique=True).size
    return inter / (total - inter)


def score_table(truth: RegionSet, detected: RegionSet) -> MatchTable:
    """All pairwise MatchScores, skipping pairs whose pixel spans cannot meet."""
    scores = np.zeros((len(truth), len(detected)), dtype=np.float64)
    spans = [(d.pixels[0], d.pixels[-1]) if d.pixels.size else None for d in detected.regions]
    for j, g in enumerate(truth.regions):
        if not g.pixels.size:
            continue
        g_lo, g_hi = g.pixels[0], g.pixels[-1]
        for i, d in enumerate(detected.regions):
            span = spans[i]
            if span is None or span[1] < g_lo or span[0] > g_hi:
                continue
            scores[j, i] = match_score(g, d)
    return MatchTable(scores)


def _components(adj_g: List[List[int]], adj_d: List[List[int]]):
    """Connected components of the bipartite graph as (gts, dets) lists."""
    seen_g = [False] * len(adj_g)
    seen_d = [False] * len(adj_d)
    out = []
    for start in range(len(adj_g)):
        if seen_g[start] or not adj_g[start]:
            continue
        gs, ds = [], []
        stack = [("g", start)]
        seen_g[start] = True
        while stack:
            side, k = stack.pop()
            if side == "g":
                gs.append(k)
                for i in adj_g[k]:
                    if not seen_d[i]:
                        seen_d[i] = True
                        stack.append(("d", i))
            else:
                ds.append(k)
                for j in adj_d[k]:
                    if not seen_g[j]:
                        seen_g[j] = True
                        stack.append(("g", j))
        out.append((sorted(gs), sorted(ds)))
    return out


def _max_matching(gts: List[int], adj_g: List[List[int]]) -> int:
    """Maximum bipartite matching size by augmenting paths (Kuhn)."""
    match_d: Dict[int, int] = {}

    def augment(j, visited):
        for i in adj_g[j]:
            if i in visited:
                continue
            visited.add(i)
            if i not in match_d or augment(match_d[i], visited):
                match_d[i] = j
                return True
        return False

    return sum(1 for j in gts if augment(j, set()))


def classify_matches(table: MatchTable, threshold: float = DEFAULT_THRESHOLD) -> MatchCounts:
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    accepted = np.asarray(table.scores) >= threshold
    G, F = accepted.shape
    adj_g = [np.flatnonzero(accepted[j]).tolist() for j in range(G)]
    adj_d = [np.flatnonzero(accepted[:, i]).tolist() for i in range(F)]

    counts = MatchCounts()
    counts.detected_o2m = sum(1 for nb in adj_d if len(nb) >= 2)
    counts.detected_m2o = sum(1 for nb in adj_g if len(nb) >= 2)
    for gs, ds in _components(adj_g, adj_d):
        if len(gs) == 1 and len(ds) == 1:
            counts.o2o += 1
        elif len(gs) == 1:
            counts.o2m += 1
        elif len(ds) == 1:
            counts.m2o += 1
        else:
            events = _max_matching(gs, adj_g)
            if len(ds) >= len(gs):
                counts.o2m += events
            else:
                counts.m2o += events
    return counts


def detection_rate(counts, G: int, weights=DEFAULT_WEIGHTS) -> float:
    """``(w1 * o2o + w2 * o2m + w3 * m2o) / G``."""
    if G < 1:
        raise ValueError(f"G must be >= 1, got {G}")
    if isinstance(counts, MatchCounts):
        counts = counts.as_tuple()
    o2o, o2m, m2o = counts
    w1, w2, w3 = weights
    return (w1 * o2o + w2 * o2m + w3 * m2o) / G


def count_accuracy(result, gt_line_count: int) -> bool:
    """True when the number of segmented lines equals the ground-truth count."""
    if gt_line_count < 0:
        raise ValueError("gt_line_count must be >= 0")
    n = len(result.lines) if hasattr(result, "lines") else int(result)
    return n == gt_line_count


def evaluate(detected: RegionSet, truth: RegionSet, threshold: float = DEFAULT_THRESHOLD,
             weights=DEFAULT_WEIGHTS) -> MatchReport:
    if (detected.width, detected.height) != (truth.width, truth.height):
        raise ValueError(
            f"page size mismatch: detected {detected.width}x{detected.height}, "
            f"truth {truth.width}x{truth.height}"
        )
    if truth.overlapping_pixels():
        raise ValueError("ground-truth regions overlap")
    table = score_table(truth, detected)
    counts = classify_matches(table, threshold)
    G, F = len(truth), len(detected)
    if G:
        dr = detection_rate(counts, G, weights)
    else:
        # a blank page segmented as blank is a perfect result
        dr = 1.0 if F == 0 else 0.0
    return MatchReport(
        G=G,
        F=F,
        o2o=counts.o2o,
        o2m=counts.o2m,
        m2o=counts.m2o,
        detection_rate=dr,
        threshold=threshold,
        weights=tuple(float(w) for w in weights),
        detected_o2m=counts.detected_o2m,
        detected_m2o=counts.detected_m2o,
        detected_overlap_pixels=detected.overlapping_pixels(),
        table=table,
    )


def regions_from_result(result, mask: Optional[BinaryMask], width: int, height: int) -> RegionSet:
    """Detected regions of a segmentation: line strips intersected with the ink mask."""
    return RegionSet.from_boxes([ln.strip for ln in result.lines], width, height, mask, DETECTED)
