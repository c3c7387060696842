"""End-to-end acceptance checks, one test per criterion.

Each test carries a ``criterion`` marker; the conftest hook prints a PASS/FAIL
line for each of them at the end of the run.
"""

import subprocess
import sys
import time

import mpmath
import numpy as np
import pytest

from hwseg.ccl import label_components
from hwseg.evaluation import (
    DEFAULT_WEIGHTS,
    GROUND_TRUTH,
    MatchTable,
    RegionSet,
    classify_matches,
    count_accuracy,
    detection_rate,
    evaluate,
    regions_from_result,
)
from hwseg.raster import BinaryMask, GrayImage, binarize
from hwseg.segmenter import SegParams, segment_page, text_height
from hwseg.synthgen import CorpusSpec, corpus_specs, generate, preset

from oracles import brute_classify, flood_fill_labels, same_partition

criterion = pytest.mark.criterion


def _text_height_oracle(w, h):
    mpmath.mp.dps = 50
    return mpmath.sqrt((mpmath.mpf(w) / 2) ** 2 + mpmath.mpf(h) ** 2) / 24


@criterion("text height formula vs extended-precision oracle (rel <= 1e-9)")
def test_text_height_formula(record_property):
    got = text_height(2480, 3508)
    ref = _text_height_oracle(2480, 3508)
    rel = abs(mpmath.mpf(got) - ref) / ref
    record_property("value", f"{got:.9f}")
    record_property("rel_err", f"{float(rel):.1e}")
    assert rel <= 1e-9


@criterion("labeling matches flood fill on 500 masks x {5,20,50}% fill, < 10 s")
def test_labeling_oracle(record_property):
    rng = np.random.default_rng(20240501)
    mismatches = 0
    t0 = time.perf_counter()
    for fill in (0.05, 0.20, 0.50):
        for _ in range(500):
            fg = rng.random((64, 64)) < fill
            labels, comps = label_components(BinaryMask(fg))
            ref, k = flood_fill_labels(fg)
            if len(comps) != k or not same_partition(labels.label, ref):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    record_property("mismatches", mismatches)
    record_property("seconds", f"{elapsed:.2f}")
    assert mismatches == 0
    assert elapsed < 10


@pytest.fixture(scope="module")
def corpus_run():
    """Generate, segment and evaluate the 200-page synthetic corpus once."""
    t0 = time.perf_counter()
    pages = []
    for spec in corpus_specs(CorpusSpec(count=200, seed=1)):
        img, gt = generate(spec)
        result = segment_page(img)
        mask = binarize(img)
        truth = RegionSet.from_label_map(gt.label_map, GROUND_TRUTH)
        detected = regions_from_result(result, mask, img.width, img.height)
        report = evaluate(detected, truth, 0.95, DEFAULT_WEIGHTS)
        pages.append((spec, gt, result, detected, report))
    return pages, time.perf_counter() - t0


@criterion("200-page corpus: count accuracy >= 99%, mean DR >= 0.95, < 120 s")
def test_synthetic_corpus(corpus_run, record_property):
    pages, elapsed = corpus_run
    assert len(pages) == 200
    for spec, *_ in pages:
        assert 5 <= spec.line_count <= 15 and spec.jitter <= 10 and spec.line_gap >= 40
        assert (spec.width, spec.height) == (1240, 1754)
    acc = sum(count_accuracy(res, gt.line_count) for _, gt, res, _, _ in pages) / len(pages)
    mean_dr = float(np.mean([rep.detection_rate for *_, rep in pages]))
    record_property("count_accuracy", f"{acc:.4f}")
    record_property("mean_dr", f"{mean_dr:.4f}")
    record_property("seconds", f"{elapsed:.1f}")
    assert acc >= 0.99
    assert mean_dr >= 0.95
    assert elapsed < 120


@criterion("self-evaluation gives DR == 1.0 on every corpus page")
def test_self_evaluation_identity(corpus_run, record_property):
    pages, _ = corpus_run
    off = 0
    for _, _, _, detected, _ in pages:
        as_truth = RegionSet(detected.regions, GROUND_TRUTH, detected.width, detected.height)
        if evaluate(detected, as_truth).detection_rate != 1.0:
            off += 1
    record_property("pages_below_1", off)
    assert off == 0


def _random_images(rng, n):
    """Mixed bag of random images, seeded with the constant and two-level edge cases."""
    for i in range(n):
        h, w = rng.integers(1, 48, size=2)
        kind = i % 5
        if kind == 0:
            data = np.full((h, w), rng.integers(0, 256))
        elif kind == 1:
            lo, hi = sorted(rng.choice(256, size=2, replace=False))
            data = np.where(rng.random((h, w)) < rng.random(), lo, hi)
        elif kind == 2:
            data = rng.choice(rng.integers(0, 256, size=rng.integers(1, 5)), size=(h, w))
        elif kind == 3:
            data = np.clip(rng.normal(200, 30, size=(h, w)), 0, 255)
        else:
            data = rng.integers(0, 256, size=(h, w))
        yield GrayImage(np.asarray(data, dtype=np.uint8))


def _exact_foreground(values):
    """v < max - sigma, decided in integers: n^2 (max - v)^2 > n*S2 - S1^2 with max - v > 0."""
    v = values.astype(object).ravel()
    n, s1, s2 = len(v), sum(v), sum(x * x for x in v)
    top = max(v)
    var_n2 = n * s2 - s1 * s1
    fg = [top - x > 0 and n * n * (top - x) ** 2 > var_n2 for x in v]
    return np.array(fg, dtype=bool).reshape(values.shape)


@criterion("binarization partition and strict threshold on 1000 random images")
def test_binarization_invariants(record_property):
    rng = np.random.default_rng(99)
    violations = 0
    for img in _random_images(rng, 1000):
        mask = binarize(img)
        fg, bg = mask.foreground, mask.background
        ok = (
            fg.shape == img.data.shape
            and not np.any(fg & bg)
            and np.all(fg | bg)
            and np.array_equal(fg, _exact_foreground(img.data))
        )
        if np.all(img.data == img.data.flat[0]):
            ok = ok and not fg.any()
        violations += not ok
    record_property("violations", violations)
    assert violations == 0


@criterion("DR((8,1,1), 10) == 0.85 and classify agrees with brute force on 1000 tables")
def test_metric_arithmetic(record_property):
    assert detection_rate((8, 1, 1), 10, (1, 0.25, 0.25)) == 0.85
    rng = np.random.default_rng(4242)
    disagreements = 0
    for _ in range(1000):
        G, F = rng.integers(1, 6, size=2)
        scores = rng.choice([0.0, 0.3, 0.94, 0.95, 0.97, 1.0], size=(G, F), p=[0.4, 0.1, 0.1, 0.1, 0.1, 0.2])
        got = classify_matches(MatchTable(scores), 0.95).as_tuple()
        disagreements += got != brute_classify(scores, 0.95)
    record_property("disagreements", disagreements)
    assert disagreements == 0


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@criterion("bench twice with the same seed is byte-identical")
def test_bench_determinism(tmp_path, record_property):
    trees = []
    for run in ("a", "b"):
        out = tmp_path / run
        cmd = [sys.executable, "-m", "hwseg", "-q", "bench", "--corpus", "--pages", "8", "--seed", "3",
               "--workers", "1", "-o", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        trees.append(_tree(out))
    record_property("files", len(trees[0]))
    assert trees[0] == trees[1]
    assert "eval/summary.json" in trees[0]


@criterion("segment_page on a 2480x3508 page in < 2 s")
def test_performance_bound(record_property):
    img, gt = generate(preset("a4-300dpi", seed=0))
    assert (img.width, img.height) == (2480, 3508)
    t0 = time.perf_counter()
    result = segment_page(img, SegParams())
    elapsed = time.perf_counter() - t0
    record_property("seconds", f"{elapsed:.3f}")
    assert len(result.lines) == gt.line_count
    assert elapsed < 2
