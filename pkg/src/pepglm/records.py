"""Structured result records and their fixed, versioned schema.

Runs emit line-delimited JSON: one ``summary`` record per chain and one
``replication`` record per (method, replication) pair, plus flat CSV
tables for batched estimates.  The schemas below are the documented
contract for downstream consumers; ``validate_record`` checks an object
against them.
"""

from __future__ import annotations

import json

import numpy as np

from .exceptions import DataValidationError

__all__ = [
    "SCHEMA_VERSION",
    "SUMMARY_RECORD_SCHEMA",
    "REPLICATION_RECORD_SCHEMA",
    "summary_record",
    "replication_records",
    "validate_record",
    "dump_records",
]

SCHEMA_VERSION = 1

SUMMARY_RECORD_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "record", "method", "family", "n", "p", "names",
        "iterations", "burn_in", "seed", "inclusion_probs", "map_model",
        "map_visits", "mpm_model", "shrinkage_mean", "shrinkage_quantiles",
        "acceptance_rates",
    ],
    "properties": {
        "schema_version": {"type": "integer"},
        "record": {"const": "summary"},
        "method": {"type": "string"},
        "family": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "p": {"type": "integer", "minimum": 0},
        "names": {"type": "array", "items": {"type": "string"}},
        "iterations": {"type": "integer"},
        "burn_in": {"type": "integer"},
        "seed": {"type": "integer"},
        "inclusion_probs": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
        },
        "map_model": {"type": "array", "items": {"type": "integer", "enum": [0, 1]}},
        "map_visits": {"type": "integer", "minimum": 0},
        "mpm_model": {"type": "array", "items": {"type": "integer", "enum": [0, 1]}},
        "shrinkage_mean": {"type": "number"},
        "shrinkage_quantiles": {"type": "object"},
        "acceptance_rates": {"type": "object"},
        "diagnostics": {"type": "object"},
    },
    "additionalProperties": True,
}

REPLICATION_RECORD_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version", "record", "method", "study", "scenario", "r",
        "replication", "map_success", "inclusion_probs",
    ],
    "properties": {
        "schema_version": {"type": "integer"},
        "record": {"const": "replication"},
        "method": {"type": "string"},
        "study": {"type": "integer"},
        "scenario": {"type": "string"},
        "r": {"type": "number"},
        "replication": {"type": "integer"},
        "map_success": {"type": "boolean"},
        "inclusion_probs": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": True,
}

_SCHEMAS = {
    "summary": SUMMARY_RECORD_SCHEMA,
    "replication": REPLICATION_RECORD_SCHEMA,
}


def _listify(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (list, tuple)):
        return [_listify(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    return x


def summary_record(method, dataset, config, summary, diagnostics=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "record": "summary",
        "method": method,
        "family": config.family.kind,
        "n": int(dataset.n),
        "p": int(dataset.p),
        "names": list(dataset.names),
        "iterations": int(config.iterations),
        "burn_in": int(config.burn_in),
        "seed": int(config.seed),
        "inclusion_probs": _listify(summary.inclusion_probs),
        "map_model": _listify(summary.map_model),
        "map_visits": int(summary.map_visits),
        "mpm_model": _listify(summary.mpm_model),
        "shrinkage_mean": float(summary.shrinkage_mean),
        "shrinkage_quantiles": {str(k): v for k, v in summary.shrinkage_quantiles.items()},
        "acceptance_rates": {
            k: (None if np.isnan(v) else float(v))
            for k, v in summary.acceptance_rates.items()
        },
        "diagnostics": _listify(diagnostics or {}),
    }


def replication_records(report: dict) -> list[dict]:
    scen = report["scenario"]
    true_model = tuple(scen["true_model"])
    out = []
    for method, res in report["methods"].items():
        incl = np.asarray(res["inclusion"])
        for rep in range(incl.shape[0]):
            out.append({
                "schema_version": SCHEMA_VERSION,
                "record": "replication",
                "method": method,
                "study": int(scen["study"]),
                "scenario": scen["scenario"],
                "r": float(scen["r"]),
                "replication": rep,
                "map_success": bool(res["map_models"][rep] == true_model),
                "inclusion_probs": incl[rep].tolist(),
            })
    return out


def validate_record(record: dict) -> None:
    """Check a record against its schema; raises on violation."""
    import jsonschema

    kind = record.get("record")
    if kind not in _SCHEMAS:
        raise DataValidationError(f"unknown record kind: {kind!r}")
    try:
        jsonschema.validate(record, _SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise DataValidationError(f"invalid {kind} record: {exc.message}") from exc


def dump_records(records, path) -> None:
    """Write records as line-delimited JSON with stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True))
            fh.write("\n")
