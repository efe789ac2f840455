"""JSON documents for clouds, families, measures, gauges, profiles and hypotheses."""
from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .errors import PreconditionError
from .frostman import FrostmanHypothesis
from .gauge import GaugeFunction
from .geometry import BallFamily, PointCloud
from .measures import DiscreteSignedMeasure, RadialProfile


def _floats(arr) -> list:
    return [float(v) for v in np.asarray(arr, dtype=float).reshape(-1)]


def cloud_to_json(cloud: PointCloud) -> dict:
    return {"dim": cloud.ambient_dim, "points": [_floats(p) for p in cloud.points],
            "resolution": cloud.resolution}


def cloud_from_json(doc: dict) -> PointCloud:
    dim = int(doc["dim"])
    pts = np.asarray(doc.get("points", []), dtype=float).reshape(-1, dim)
    return PointCloud(dim, pts, float(doc.get("resolution", 1e-12)))


def family_to_json(family: BallFamily) -> dict:
    balls = []
    for k, (c, r) in enumerate(zip(family.centers, family.radii)):
        item = {"c": _floats(c), "r": float(r)}
        if family.labels is not None:
            item["label"] = int(family.labels[k])
        balls.append(item)
    return {"dim": family.ambient_dim, "balls": balls}


def family_from_json(doc: dict) -> BallFamily:
    dim = int(doc["dim"])
    balls = doc.get("balls", [])
    centers = np.asarray([b["c"] for b in balls], dtype=float).reshape(-1, dim)
    radii = np.asarray([b["r"] for b in balls], dtype=float)
    labels = None
    if balls and all("label" in b for b in balls):
        labels = np.asarray([b["label"] for b in balls], dtype=int)
    return BallFamily(dim, centers, radii, labels)


def measure_to_json(mu: DiscreteSignedMeasure) -> dict:
    return {"dim": mu.ambient_dim,
            "atoms": [{"x": _floats(p), "w": float(w)} for p, w in zip(mu.points, mu.weights)]}


def measure_from_json(doc: dict) -> DiscreteSignedMeasure:
    dim = int(doc["dim"])
    atoms = doc.get("atoms", [])
    pts = np.asarray([a["x"] for a in atoms], dtype=float).reshape(-1, dim)
    return DiscreteSignedMeasure(dim, pts, np.asarray([a["w"] for a in atoms], dtype=float))


def gauge_to_json(g: GaugeFunction) -> dict:
    if g.kind == "table":
        return {"kind": "table", "t": list(g.t), "g": list(g.g)}
    doc = {"kind": g.kind, "params": list(g.params)}
    if g.kind == "log_power":
        doc["t_max"] = g.t_max
    return doc


def gauge_from_json(doc: dict) -> GaugeFunction:
    kind = doc.get("kind")
    if kind == "table":
        return GaugeFunction.table(doc["t"], doc["g"])
    if kind == "log_power":
        params = tuple(doc["params"])
        t_max = doc.get("t_max")
        if t_max is None:
            t_max = GaugeFunction.log_power(params[0], params[1]).t_max
        return GaugeFunction("log_power", params, float(t_max))
    if kind == "power":
        return GaugeFunction("power", tuple(doc["params"]))
    raise PreconditionError(f"unknown gauge kind {kind!r}")


def profile_to_json(p: RadialProfile) -> dict:
    return {"kind": p.kind, "params": list(p.params), "equivalence_factor": p.equivalence_factor}


def profile_from_json(doc: dict) -> RadialProfile:
    return RadialProfile(doc.get("kind", "plateau"), tuple(doc.get("params", ())),
                         float(doc.get("equivalence_factor", 1.0)))


def hypothesis_from_json(doc: dict) -> FrostmanHypothesis:
    """``{"profile": {...}, "alpha": x | "gauge": {...}, "weight": {...}, "constant": K}``."""
    profile = profile_from_json(doc.get("profile", {"kind": "plateau"}))
    gauge_sum = gauge_from_json(doc["gauge"]) if "gauge" in doc else float(doc["alpha"])
    weight = gauge_from_json(doc.get("weight", {"kind": "power", "params": [1.0]}))
    return FrostmanHypothesis(profile, gauge_sum, weight, float(doc.get("constant", 1.0)))


def hypothesis_to_json(h: FrostmanHypothesis) -> dict:
    doc = {"profile": profile_to_json(h.profile)}
    if isinstance(h.gauge_sum, GaugeFunction):
        doc["gauge"] = gauge_to_json(h.gauge_sum)
    else:
        doc["alpha"] = float(h.gauge_sum)
    doc["weight"] = gauge_to_json(h.weight)
    doc["constant"] = h.constant
    return doc


def sanitize(obj):
    """Make an object JSON-safe: numpy scalars and arrays to Python, infinities to strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(obj) -> str:
    return json.dumps(sanitize(obj), indent=2) + "\n"


def load(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_atomic(path: str, text: str):
    """Write through a temporary file in the target directory, then rename."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
