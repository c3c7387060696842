"""JSON Schemas for every document the command line tool writes."""

_BBOX = {
    "type": "array",
    "items": {"type": "integer", "minimum": 0},
    "minItems": 4,
    "maxItems": 4,
}

SEG_PARAMS = {
    "type": "object",
    "required": [
        "alignment_tolerance", "area_min", "area_max",
        "min_height_factor", "max_height_factor", "min_ink_fraction",
    ],
    "properties": {
        "alignment_tolerance": {"type": "integer", "minimum": 1},
        "area_min": {"type": "integer", "minimum": 1},
        "area_max": {"type": ["integer", "null"], "minimum": 1},
        "min_height_factor": {"type": "number", "exclusiveMinimum": 0},
        "max_height_factor": {"type": "number", "exclusiveMinimum": 0},
        "min_ink_fraction": {"type": "number", "minimum": 0, "maximum": 1},
    },
    "additionalProperties": False,
}

SEGMENTATION_RESULT = {
    "type": "object",
    "required": ["image", "text_height", "params", "lines", "discarded"],
    "properties": {
        "image": {"type": ["string", "null"]},
        "text_height": {"type": "number", "exclusiveMinimum": 0},
        "params": SEG_PARAMS,
        "lines": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "bbox", "components"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "bbox": _BBOX,
                    "components": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                },
                "additionalProperties": False,
            },
        },
        "discarded": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bbox", "reason"],
                "properties": {"bbox": _BBOX, "reason": {"type": "string"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

GROUND_TRUTH_RECTS = {
    "type": "object",
    "required": ["line_count", "lines"],
    "properties": {
        "line_count": {"type": "integer", "minimum": 0},
        "lines": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bbox"],
                "properties": {"bbox": _BBOX},
            },
        },
    },
}

_COUNT = {"type": "integer", "minimum": 0}

MATCH_REPORT = {
    "type": "object",
    "required": [
        "page", "truth_format", "segmented_lines", "truth_lines", "count_correct",
        "G", "F", "o2o", "o2m", "m2o", "detection_rate", "threshold", "weights",
    ],
    "properties": {
        "page": {"type": "string"},
        "truth_format": {"enum": ["label-map", "rectangles"]},
        "foreground": {"enum": ["image", "truth", "none"]},
        "segmented_lines": _COUNT,
        "truth_lines": _COUNT,
        "count_correct": {"type": "boolean"},
        "G": _COUNT,
        "F": _COUNT,
        "o2o": _COUNT,
        "o2m": _COUNT,
        "m2o": _COUNT,
        "detection_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "weights": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "detected_o2m": _COUNT,
        "detected_m2o": _COUNT,
        "detected_overlap_pixels": _COUNT,
        "scores": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}

EVAL_SUMMARY = {
    "type": "object",
    "required": ["pages", "mean_dr", "count_accuracy_rate"],
    "properties": {
        "pages": _COUNT,
        "mean_dr": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "count_accuracy_rate": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "threshold": {"type": "number"},
        "weights": {"type": "array", "items": {"type": "number"}},
        "unpaired": {"type": "array", "items": {"type": "string"}},
        "errors": {"type": "array"},
    },
}

MANIFEST = {
    "type": "object",
    "required": ["preset", "pages"],
    "properties": {
        "preset": {"type": ["string", "null"]},
        "corpus": {"type": ["object", "null"]},
        "pages": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "spec", "image", "gt", "gt_json"],
                "properties": {
                    "name": {"type": "string"},
                    "spec": {"type": "object"},
                    "image": {"type": "string"},
                    "gt": {"type": "string"},
                    "gt_json": {"type": "string"},
                },
            },
        },
    },
}

ERRORS = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["file", "error"],
        "properties": {"file": {"type": "string"}, "error": {"type": "string"}},
    },
}
