"""File formats: JSON schemas, deterministic JSON/CSV writers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

_NUMBER = {"type": "number"}
_POINT = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

CHAIN_SCHEMA = {
    "type": "object",
    "required": ["dimension", "vertices", "simplices"],
    "additionalProperties": False,
    "properties": {
        "dimension": {"type": "integer", "minimum": 0, "maximum": 2},
        "vertices": {"type": "array", "items": _POINT},
        "simplices": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["coeff", "verts"],
                "additionalProperties": False,
                "properties": {
                    "coeff": _NUMBER,
                    "verts": {"type": "array", "items": {"type": "integer", "minimum": 0},
                              "minItems": 1, "maxItems": 3},
                },
            },
        },
    },
}

FLATNORM_SCHEMA = {
    "type": "object",
    "required": ["value", "filling", "residual"],
    "properties": {
        "value": {"type": "number", "minimum": 0},
        "filling": CHAIN_SCHEMA,
        "residual": CHAIN_SCHEMA,
        "refine": {"type": "integer", "minimum": 0},
        "lp_method": {"type": "string"},
        "lp_status": {"type": "string"},
        "mass": _NUMBER,
    },
}

_MONOMIALS = {"type": "array", "items": {"type": "array", "items": _NUMBER, "minItems": 4, "maxItems": 4}}

FIELD_SCHEMA = {
    "type": "object",
    "required": ["degree", "components"],
    "additionalProperties": False,
    "properties": {
        "degree": {"type": "integer", "minimum": 0, "maximum": 3},
        "components": {
            "type": "object",
            "propertyNames": {"enum": ["", "t", "1", "2", "t1", "t2", "12", "t12"]},
            "additionalProperties": _MONOMIALS,
        },
    },
}

# every report carries the command, its parameters and the postcondition verdict
REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "params", "checks", "ok"],
    "properties": {
        "command": {"enum": ["koch", "flatnorm", "dimension", "balance", "worldlines", "conformal", "cantor"]},
        "params": {"type": "object"},
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "ok": {"type": "boolean"},
    },
}

KOCH_SUMMARY_SCHEMA = {
    "allOf": [REPORT_SCHEMA, {
        "type": "object",
        "required": ["mass", "area", "triangle_counts"],
        "properties": {
            "mass": _NUMBER,
            "area": _NUMBER,
            "triangle_counts": {"type": "object", "additionalProperties": {"type": "integer"}},
            "finished_levels": {"type": "integer"},
            "active_height": _NUMBER,
        },
    }],
}

DIMENSION_SCHEMA = {
    "allOf": [REPORT_SCHEMA, {
        "type": "object",
        "required": ["slope", "intercept", "residual_rms", "scales", "counts"],
        "properties": {
            "slope": _NUMBER,
            "intercept": _NUMBER,
            "residual_rms": _NUMBER,
            "scales": {"type": "array", "items": _NUMBER},
            "counts": {"type": "array", "items": _NUMBER},
        },
    }],
}

SCHEMAS = {
    "chain": CHAIN_SCHEMA,
    "flatnorm": FLATNORM_SCHEMA,
    "field": FIELD_SCHEMA,
    "report": REPORT_SCHEMA,
    "koch_summary": KOCH_SUMMARY_SCHEMA,
    "dimension": DIMENSION_SCHEMA,
}


def to_plain(obj):
    """Numpy scalars/arrays to JSON-ready Python values; non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
