"""JSON formats for meshes, geometries, patch sets and problem files.

Rationals serialize as strings like ``"1/4"``; knot vectors use the text
form ``p; b/q:m ...``.  Problem files are schema-validated before any
computation and unknown keys are rejected.
"""

from __future__ import annotations

import json
from fractions import Fraction

import jsonschema
import numpy as np

from .bspline import KnotVector
from .geometry import GeometryMap
from .multipatch import Interface
from .tmesh import RawTMesh

__all__ = [
    "rational_to_str",
    "tmesh_to_dict",
    "tmesh_from_dict",
    "geometry_to_dict",
    "geometry_from_dict",
    "patchset_to_dict",
    "patchset_from_dict",
    "validate_problem",
    "load_json",
    "dump_json",
    "PROBLEM_SCHEMA",
]


def rational_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _rat_list(vals):
    return [rational_to_str(v) for v in vals]


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(data, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- T-mesh ---------------------------------------------------------------------


def tmesh_to_dict(raw: RawTMesh) -> dict:
    out = {
        "breakpoints1": _rat_list(raw.breakpoints_x),
        "breakpoints2": _rat_list(raw.breakpoints_y),
        "faces": [list(f) for f in raw.faces],
    }
    if raw.multiplicities:
        out["multiplicities"] = [
            {"axis": axis, "index": idx, "mult": m}
            for (axis, idx), m in sorted(raw.multiplicities.items())
        ]
    return out


def tmesh_from_dict(d: dict) -> RawTMesh:
    mult = {}
    for entry in d.get("multiplicities", []):
        mult[(entry["axis"], entry["index"])] = int(entry["mult"])
    return RawTMesh(
        tuple(Fraction(b) for b in d["breakpoints1"]),
        tuple(Fraction(b) for b in d["breakpoints2"]),
        tuple(tuple(f) for f in d["faces"]),
        mult,
    )


# -- geometry -------------------------------------------------------------------


def geometry_to_dict(geo: GeometryMap) -> dict:
    out = {
        "degrees": [kv.degree for kv in geo.kvs],
        "knot_vectors": [kv.to_text() for kv in geo.kvs],
        "control_points": np.asarray(geo.control_points).tolist(),
    }
    if geo.weights is not None:
        out["weights"] = np.asarray(geo.weights).tolist()
    return out


def geometry_from_dict(d: dict) -> GeometryMap:
    kvs = tuple(KnotVector.from_text(t) for t in d["knot_vectors"])
    return GeometryMap(kvs, np.asarray(d["control_points"], dtype=float), d.get("weights"))


# -- patch sets -------------------------------------------------------------------


def patchset_to_dict(geoms, interfaces) -> dict:
    return {
        "patches": [geometry_to_dict(g) for g in geoms],
        "interfaces": [
            {
                "a": [itf.a[0], list(itf.a[1])],
                "b": [itf.b[0], list(itf.b[1])],
                **({"perm": list(itf.perm)} if itf.perm else {}),
                **({"flip": list(itf.flip)} if itf.flip else {}),
            }
            for itf in interfaces
        ],
    }


def patchset_from_dict(d: dict):
    geoms = [geometry_from_dict(g) for g in d["patches"]]
    interfaces = []
    for e in d.get("interfaces", []):
        interfaces.append(
            Interface(
                (e["a"][0], tuple(e["a"][1])),
                (e["b"][0], tuple(e["b"][1])),
                tuple(e["perm"]) if "perm" in e else None,
                tuple(e["flip"]) if "flip" in e else None,
            )
        )
    return geoms, interfaces


# -- problem files -----------------------------------------------------------------

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {
            "enum": [
                "check-complex",
                "tmesh-check",
                "solve-eig",
                "solve-source",
                "solve-waveguide",
                "convergence",
            ]
        },
        "formulation": {"enum": ["rotrot2d", "laplace2d", "curlcurl3d"]},
        "benchmark": {
            "enum": ["square", "lsection", "thick-l", "cylinder-sector", "straight-guide"]
        },
        "degree": {"type": "integer", "minimum": 1},
        "degrees": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "n": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "level": {"type": "integer", "minimum": 0},
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "mesh": {"type": "string"},
        "geometry": {"type": "string"},
        "multipatch": {"type": "string"},
        "bc": {"enum": ["all", "none"]},
        "eigencount": {"type": "integer", "minimum": 1},
        "nz": {"type": "integer", "minimum": 1},
        "n_section": {"type": "integer", "minimum": 1},
        "k": {"type": "number"},
        "length": {"type": "number"},
        "tensor": {"type": "boolean"},
        "zero_tol": {"type": "number"},
    },
}


def validate_problem(d: dict) -> dict:
    jsonschema.validate(d, PROBLEM_SCHEMA)
    return d
