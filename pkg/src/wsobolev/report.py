"""JSON report assembly, schema self-check and CSV series output."""
from __future__ import annotations

import csv
import json
import math
import os

import jsonschema
import numpy as np

from .criteria import CompactnessReport, INCONCLUSIVE, LIKELY_COMPACT, LIKELY_NOT_COMPACT
from .molcanov import CriterionSweep
from .spectral import SpectralSweep
from . import trend

SCHEMA_VERSION = "1.0"

_SERIES_REF = {"type": "string", "pattern": "^[a-z_]+$"}
_SUB_REPORT = {
    "type": ["object", "null"],
    "required": ["series_ref", "verdict"],
    "properties": {
        "series_ref": _SERIES_REF,
        "verdict": {"enum": [trend.DIVERGING, trend.BOUNDED, trend.INCONCLUSIVE]},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "config_echo", "potential", "criteria",
                 "molcanov", "spectral", "overall"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "config_echo": {"type": "object"},
        "potential": {
            "type": "object",
            "required": ["kind", "lower_bound", "certified"],
            "properties": {
                "kind": {"enum": ["V1", "V2"]},
                "lower_bound": {"type": "number"},
                "certified": {"type": "boolean"},
            },
        },
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "direction", "outcome", "evidence_ref"],
                "properties": {
                    "id": {"type": "string"},
                    "direction": {"enum": ["sufficient", "necessary", "characterization"]},
                    "outcome": {"enum": ["passes", "fails", "inconclusive"]},
                    "evidence_ref": _SERIES_REF,
                },
            },
        },
        "molcanov": _SUB_REPORT,
        "spectral": _SUB_REPORT,
        "overall": {"enum": [LIKELY_COMPACT, LIKELY_NOT_COMPACT, INCONCLUSIVE]},
        "conflicts": {"type": "array", "items": {"type": "string"}},
        "series": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["abscissa", "values"],
                "properties": {
                    "abscissa": {"type": "array", "items": {"type": "number"}},
                    "values": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
    },
}


def plain(obj):
    """Convert numpy scalars, tuples and enums to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _thresholds():
    return {"divergence_ratio": trend.DIVERGENCE_RATIO,
            "plateau_growth": trend.PLATEAU_GROWTH}


def sweep_series(sweep, kind):
    if isinstance(sweep, CriterionSweep):
        extra = {"d": sweep.d, "g": sweep.g, "g_of_d": sweep.g_of_d, "c": sweep.c,
                 "gamma": sweep.gamma, "shift": sweep.shift, "exact": sweep.exact}
    elif isinstance(sweep, SpectralSweep):
        extra = {"d": sweep.d, "m": sweep.m, "baseline": sweep.baseline,
                 "converged": sweep.converged, "max_residual": max(sweep.residuals)}
    else:
        raise TypeError(f"unknown sweep type {type(sweep).__name__}")
    return {"abscissa": sweep.radii, "values": sweep.values, "centers": sweep.centers,
            "per_ray": sweep.per_ray, "trend": sweep.verdict.as_dict(),
            "thresholds": _thresholds(), "kind": kind, **extra}


def build_report(rep: CompactnessReport, config: dict) -> dict:
    series = {}
    criteria = []
    for v in rep.verdicts:
        ev = dict(v.evidence)
        ev["thresholds"] = _thresholds()
        series[v.criterion] = ev
        criteria.append({"id": v.criterion, "direction": v.direction.value,
                         "outcome": v.outcome.value, "evidence_ref": v.criterion})
    mol = spec = None
    if rep.molcanov is not None:
        series["molcanov"] = sweep_series(rep.molcanov, "molcanov")
        mol = {"series_ref": "molcanov", "verdict": rep.molcanov.verdict.label,
               "gamma": rep.molcanov.gamma, "exact": rep.molcanov.exact}
    if rep.spectral is not None:
        series["spectral"] = sweep_series(rep.spectral, "spectral")
        spec = {"series_ref": "spectral", "verdict": rep.spectral.verdict.label,
                "converged": rep.spectral.converged,
                "aggregated": False}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config,
        "potential": dict(rep.probe or {}),
        "criteria": criteria,
        "molcanov": mol,
        "spectral": spec,
        "overall": rep.overall,
        "conflicts": rep.conflicts,
        "series": series,
    }
    doc = plain(doc)
    jsonschema.validate(doc, REPORT_SCHEMA)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_csv_series(series: dict, directory):
    """One two-column CSV per series; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in sorted(series):
        s = series[name]
        path = os.path.join(directory, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["abscissa", "value"])
            for a, v in zip(s["abscissa"], s["values"]):
                out.writerow([repr(float(a)), repr(float(v))])
        paths.append(path)
    return paths
