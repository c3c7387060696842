"""Command line front end: ``hwseg segment|eval|gen|bench``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import synthgen
from .ccl import BBox
from .evaluation import (
    DEFAULT_THRESHOLD,
    DEFAULT_WEIGHTS,
    GROUND_TRUTH,
    RegionSet,
    count_accuracy,
    evaluate,
    regions_from_result,
)
from .raster import BinaryMask, DecodeError, binarize, encode_pgm, encode_ppm, read_image
from .segmenter import SegmentationResult, SegParams, segment_page

log = logging.getLogger("hwseg")

IMAGE_SUFFIXES = (".pgm", ".png")
SEG_SUFFIX = ".seg.json"
GT_PGM_SUFFIX = ".gt.pgm"
GT_JSON_SUFFIX = ".gt.json"
OVERLAY_SUFFIX = ".overlay.ppm"


class UsageError(Exception):
    pass


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _map(fn, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# segment


def _is_page_image(p: Path) -> bool:
    name = p.name
    return (
        p.suffix.lower() in IMAGE_SUFFIXES
        and not name.endswith(GT_PGM_SUFFIX)
        and not name.endswith(OVERLAY_SUFFIX)
    )


def collect_inputs(paths: Iterable) -> List[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.iterdir() if q.is_file() and _is_page_image(q)))
        else:
            out.append(p)
    return out


def page_stem(path: Path) -> str:
    return path.name[: -len(path.suffix)] if path.suffix else path.name


def overlay(img, result: SegmentationResult, thickness: int = 2) -> np.ndarray:
    """Page in gray with each segmented strip outlined in red."""
    rgb = np.repeat(img.data[:, :, None], 3, axis=2).copy()
    red = np.array([255, 0, 0], dtype=np.uint8)
    for ln in result.lines:
        b = ln.strip
        t = min(thickness, b.height, b.width)
        rgb[b.y_min : b.y_min + t, b.x_min : b.x_max + 1] = red
        rgb[b.y_max - t + 1 : b.y_max + 1, b.x_min : b.x_max + 1] = red
        rgb[b.y_min : b.y_max + 1, b.x_min : b.x_min + t] = red
        rgb[b.y_min : b.y_max + 1, b.x_max - t + 1 : b.x_max + 1] = red
    return rgb


def _segment_one(job) -> Tuple[str, Optional[str]]:
    path, out_dir, params, want_overlay = job
    path = Path(path)
    try:
        img = read_image(path)
    except (OSError, DecodeError) as exc:
        return str(path), str(exc)
    result = segment_page(img, params, name=path.name)
    stem = page_stem(path)
    write_json(out_dir / (stem + SEG_SUFFIX), result.to_dict())
    if want_overlay:
        (out_dir / (stem + OVERLAY_SUFFIX)).write_bytes(encode_ppm(overlay(img, result)))
    return str(path), None


def run_segment(inputs: Sequence, out_dir: Path, params: SegParams, want_overlay=False,
                workers: int = 1) -> List[Dict]:
    """Segment every input page; returns the per-file error records."""
    out_dir.mkdir(parents=True, exist_ok=True)
    files = collect_inputs(inputs)
    jobs = [(p, out_dir, params, want_overlay) for p in files]
    errors = [{"file": f, "error": e} for f, e in _map(_segment_one, jobs, workers) if e]
    for rec in errors:
        log.error("%s: %s", rec["file"], rec["error"])
    err_path = out_dir / "errors.json"
    if errors:
        write_json(err_path, errors)
    elif err_path.exists():
        err_path.unlink()
    return errors


# ---------------------------------------------------------------------------
# eval


def _find_image(names: Iterable[str], dirs: Iterable[Path]) -> Optional[Path]:
    for d in dirs:
        if d is None:
            continue
        for name in names:
            if name and (d / name).is_file():
                return d / name
    return None


def pair_results(results_dir: Path, truth_dir: Path):
    """Match ``<stem>.seg.json`` results with ``<stem>.gt.pgm`` / ``<stem>.gt.json`` truth."""
    results = {p.name[: -len(SEG_SUFFIX)]: p for p in results_dir.glob("*" + SEG_SUFFIX)}
    truths: Dict[str, Path] = {}
    for p in truth_dir.glob("*" + GT_JSON_SUFFIX):
        truths[p.name[: -len(GT_JSON_SUFFIX)]] = p
    # pixel-exact label maps take precedence over rectangles
    for p in truth_dir.glob("*" + GT_PGM_SUFFIX):
        truths[p.name[: -len(GT_PGM_SUFFIX)]] = p
    pairs = [(s, results[s], truths[s]) for s in sorted(results) if s in truths]
    unpaired = sorted(
        [str(results[s]) for s in results if s not in truths]
        + [str(truths[s]) for s in truths if s not in results]
    )
    return pairs, unpaired


def _eval_one(job) -> Dict:
    stem, result_path, truth_path, image_dirs, threshold, weights, verbose = job
    try:
        result = SegmentationResult.from_dict(read_json(result_path))
        image_path = _find_image(
            [result.image] + [stem + s for s in IMAGE_SUFFIXES], image_dirs
        )
        mask: Optional[BinaryMask] = None
        size = None
        if image_path is not None:
            img = read_image(image_path)
            mask = binarize(img)
            size = (img.width, img.height)

        if truth_path.name.endswith(GT_PGM_SUFFIX):
            labels = read_image(truth_path).data
            truth_format = "label-map"
            if size is not None and size != (labels.shape[1], labels.shape[0]):
                raise ValueError("truth label map and page image differ in size")
            size = (labels.shape[1], labels.shape[0])
            truth = RegionSet.from_label_map(labels, GROUND_TRUTH)
            truth_lines = len(truth)
            if mask is None:
                mask = BinaryMask(labels > 0)
                fg_source = "truth"
            else:
                fg_source = "image"
        else:
            doc = read_json(truth_path)
            truth_format = "rectangles"
            boxes = [BBox.from_xyxy(ln["bbox"]) for ln in doc["lines"]]
            truth_lines = int(doc.get("line_count", len(boxes)))
            if size is None:
                every = boxes + [ln.strip for ln in result.lines]
                size = (
                    max((b.x_max for b in every), default=0) + 1,
                    max((b.y_max for b in every), default=0) + 1,
                )
            truth = RegionSet.from_boxes(boxes, size[0], size[1], mask, GROUND_TRUTH)
            fg_source = "image" if mask is not None else "none"

        detected = regions_from_result(result, mask, *size)
        report = evaluate(detected, truth, threshold, weights)
    except (OSError, ValueError, KeyError, DecodeError) as exc:
        return {"page": stem, "error": str(exc)}

    doc = {
        "page": stem,
        "truth_format": truth_format,
        "foreground": fg_source,
        "segmented_lines": len(result.lines),
        "truth_lines": truth_lines,
        "count_correct": count_accuracy(result, truth_lines),
    }
    doc.update(report.to_dict(verbose=verbose))
    return doc


def run_eval(results_dir: Path, truth_dir: Path, out_dir: Path, image_dir: Optional[Path] = None,
             threshold: float = DEFAULT_THRESHOLD, weights=DEFAULT_WEIGHTS, verbose=False,
             workers: int = 1) -> Dict:
    pairs, unpaired = pair_results(results_dir, truth_dir)
    if not pairs:
        raise UsageError("no pairs found")
    out_dir.mkdir(parents=True, exist_ok=True)
    dirs = [image_dir, truth_dir, results_dir]
    jobs = [(s, r, t, dirs, threshold, tuple(weights), verbose) for s, r, t in pairs]
    reports = _map(_eval_one, jobs, workers)

    errors, good = [], []
    for rep in reports:
        if "error" in rep:
            errors.append({"file": rep["page"], "error": rep["error"]})
            log.error("%s: %s", rep["page"], rep["error"])
        else:
            good.append(rep)
            write_json(out_dir / f"{rep['page']}.report.json", rep)
    for u in unpaired:
        log.warning("unpaired: %s", u)

    summary = {
        "pages": len(good),
        "mean_dr": float(np.mean([r["detection_rate"] for r in good])) if good else None,
        "count_accuracy_rate": (
            sum(r["count_correct"] for r in good) / len(good) if good else None
        ),
        "threshold": threshold,
        "weights": [float(w) for w in weights],
        "unpaired": unpaired,
        "errors": errors,
    }
    write_json(out_dir / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# gen


def specs_from_document(doc: Dict):
    """Page specs (and their preset / corpus labels) from a spec-file document.

    Accepted shapes::

        {"corpus": {...CorpusSpec fields...}}
        {"pages": [{...PageSpec fields...}, ...]}
        {"preset": "wide-gaps", "rng_seed": 3, ...PageSpec overrides...}
        {...PageSpec fields...}
    """
    if not isinstance(doc, dict):
        raise ValueError("spec file must hold a JSON object")
    if "corpus" in doc:
        corpus = synthgen.CorpusSpec.from_dict(doc["corpus"])
        return synthgen.corpus_specs(corpus), None, corpus.to_dict()
    if "pages" in doc:
        return [synthgen.PageSpec.from_dict(p) for p in doc["pages"]], doc.get("preset"), None
    doc = dict(doc)
    name = doc.pop("preset", None)
    base = synthgen.preset(name, int(doc.get("rng_seed", 0))) if name else synthgen.PageSpec()
    merged = base.to_dict()
    merged.update(doc)
    return [synthgen.PageSpec.from_dict(merged)], name, None


def specs_from_flags(args) -> Tuple[List, Optional[str], Optional[Dict]]:
    if args.corpus:
        corpus = synthgen.CorpusSpec(count=args.pages, seed=args.seed)
        return synthgen.corpus_specs(corpus), None, corpus.to_dict()
    base = synthgen.preset(args.preset, args.seed) if args.preset else synthgen.PageSpec(rng_seed=args.seed)
    overrides = {
        "line_count": args.lines,
        "width": args.width,
        "height": args.height,
        "line_height": args.line_height,
        "line_gap": args.line_gap,
        "jitter": args.jitter,
        "blob_count_per_line": args.blobs,
    }
    kw = {k: v for k, v in overrides.items() if v is not None}
    base = replace(base, **kw)
    specs = [replace(base, rng_seed=args.seed + i) for i in range(args.pages)]
    return specs, args.preset, None


def _gen_one(job) -> Dict:
    index, spec, out_dir = job
    img, gt = synthgen.generate(spec)
    name = f"page_{index:04d}"
    (out_dir / f"{name}.pgm").write_bytes(encode_pgm(img))
    (out_dir / f"{name}{GT_PGM_SUFFIX}").write_bytes(encode_pgm(gt.label_map))
    write_json(out_dir / f"{name}{GT_JSON_SUFFIX}", gt.to_dict())
    return {
        "name": name,
        "spec": spec.to_dict(),
        "image": f"{name}.pgm",
        "gt": f"{name}{GT_PGM_SUFFIX}",
        "gt_json": f"{name}{GT_JSON_SUFFIX}",
    }


def run_gen(specs, out_dir: Path, preset_name=None, corpus=None, workers: int = 1) -> Dict:
    for spec in specs:
        spec.validate()
    out_dir.mkdir(parents=True, exist_ok=True)
    pages = _map(_gen_one, [(i, s, out_dir) for i, s in enumerate(specs)], workers)
    manifest = {"preset": preset_name, "corpus": corpus, "pages": pages}
    write_json(out_dir / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------
# argument parsing


def _weights(text: str) -> Tuple[float, float, float]:
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"weights must be three numbers, got {text!r}") from None
    if len(parts) != 3 or any(w < 0 for w in parts):
        raise argparse.ArgumentTypeError(f"weights must be three non-negative numbers, got {text!r}")
    return parts


def _threshold(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"match threshold must be in (0, 1], got {v}")
    return v


def _add_seg_flags(p: argparse.ArgumentParser) -> None:
    d = SegParams()
    g = p.add_argument_group("segmentation")
    g.add_argument("--tolerance", type=int, default=d.alignment_tolerance,
                   help="max vertical distance between chained components (px)")
    g.add_argument("--area-min", type=int, default=d.area_min)
    g.add_argument("--area-max", type=int, default=d.area_max)
    g.add_argument("--min-ink", type=float, default=d.min_ink_fraction)
    g.add_argument("--height-min-factor", type=float, default=d.min_height_factor)
    g.add_argument("--height-max-factor", type=float, default=d.max_height_factor)


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("evaluation")
    g.add_argument("--match-threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    g.add_argument("--weights", type=_weights, default=DEFAULT_WEIGHTS, help="w1,w2,w3")
    g.add_argument("--verbose", action="store_true", help="include the full score table")


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("generation")
    g.add_argument("--spec", type=Path, help="JSON spec file")
    g.add_argument("--preset", choices=sorted(synthgen.PRESETS))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--pages", type=int, default=1)
    g.add_argument("--corpus", action="store_true", help="randomised corpus layouts")
    g.add_argument("--lines", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--line-height", type=int)
    g.add_argument("--line-gap", type=int)
    g.add_argument("--jitter", type=int)
    g.add_argument("--blobs", type=int)


def seg_params(args) -> SegParams:
    return SegParams(
        alignment_tolerance=args.tolerance,
        area_min=args.area_min,
        area_max=args.area_max,
        min_height_factor=args.height_min_factor,
        max_height_factor=args.height_max_factor,
        min_ink_fraction=args.min_ink,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwseg", description=__doc__)
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment page images into text lines")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--overlay", action="store_true", help="also write outlined PPM overlays")
    p.add_argument("--workers", type=int, default=1)
    _add_seg_flags(p)

    p = sub.add_parser("eval", help="score segmentation results against ground truth")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--images", type=Path, help="where to find the page images (foreground)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_eval_flags(p)

    p = sub.add_parser("gen", help="generate a synthetic corpus with ground truth")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    _add_gen_flags(p)

    p = sub.add_parser("bench", help="generate, segment and evaluate in one pass")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--overlay", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    _add_gen_flags(p)
    _add_seg_flags(p)
    _add_eval_flags(p)
    return parser


def _gen_specs(args):
    if args.spec is not None:
        return specs_from_document(read_json(args.spec))
    return specs_from_flags(args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "segment":
            errors = run_segment(args.inputs, args.output, seg_params(args), args.overlay, args.workers)
            return 1 if errors else 0

        if args.command == "eval":
            summary = run_eval(args.results, args.truth, args.output, args.images,
                               args.match_threshold, args.weights, args.verbose, args.workers)
            print(json.dumps({k: summary[k] for k in ("pages", "mean_dr", "count_accuracy_rate")}))
            return 1 if summary["unpaired"] or summary["errors"] else 0

        if args.command == "gen":
            specs, name, corpus = _gen_specs(args)
            manifest = run_gen(specs, args.output, name, corpus, args.workers)
            log.info("wrote %d page(s) to %s", len(manifest["pages"]), args.output)
            return 0

        if args.command == "bench":
            params = seg_params(args)
            specs, name, corpus = _gen_specs(args)
            corpus_dir = args.output / "corpus"
            results_dir = args.output / "results"
            run_gen(specs, corpus_dir, name, corpus, args.workers)
            errors = run_segment([corpus_dir], results_dir, params, args.overlay, args.workers)
            summary = run_eval(results_dir, corpus_dir, args.output / "eval", corpus_dir,
                               args.match_threshold, args.weights, args.verbose, args.workers)
            print(json.dumps({k: summary[k] for k in ("pages", "mean_dr", "count_accuracy_rate")}))
            return 1 if errors or summary["unpaired"] or summary["errors"] else 0
    except (UsageError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    parser.error(f"unknown command {args.command}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
