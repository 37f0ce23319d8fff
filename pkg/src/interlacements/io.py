"""Deterministic file formats for batch runs.

CSV and JSON writers shared by the command line: float cells use ``repr``
(shortest round-trip form), JSON keys are sorted, and nothing records wall
time or hostnames, so identical inputs produce identical bytes.  Every JSON
document carries a schema tag.
"""

from __future__ import annotations

import configparser
import hashlib
import json

import numpy as np

from .graph import WeightedWindow
from .interlace import FieldBatch
from .reporting import TestReport

#: Tag stamped into every JSON document this package writes.
SCHEMA = "interlacements/1"


def format_float(x) -> str:
    """Shortest decimal string that round-trips the double exactly."""
    return repr(float(x))


def vertex_label(v) -> str:
    """Space-joined coordinates; stays unquoted inside CSV."""
    return " ".join(str(c) for c in v)


def window_hash(window: WeightedWindow) -> str:
    """Stable 16-hex digest of the window's JSON description."""
    return hashlib.sha256(window.to_json().encode()).hexdigest()[:16]


def dump_json(obj: dict, path) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def write_matrix_csv(path, window: WeightedWindow, values: np.ndarray) -> None:
    """Dense symmetric kernel as ``row,col,value`` lines in index order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row,col,value\n")
        for i, vi in enumerate(window.vertices):
            for j, vj in enumerate(window.vertices):
                fh.write(f"{vertex_label(vi)},{vertex_label(vj)},{format_float(values[i, j])}\n")


def write_vector_csv(path, window: WeightedWindow, values: np.ndarray) -> None:
    """Per-vertex values as ``vertex,value`` lines in index order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("vertex,value\n")
        for i, v in enumerate(window.vertices):
            fh.write(f"{vertex_label(v)},{format_float(values[i])}\n")


def write_field_csv(path, batch: FieldBatch) -> None:
    """Occupation samples as ``sample,vertex,value`` lines, dense."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample,vertex,value\n")
        for s in range(batch.count):
            row = batch.samples[s]
            for i, v in enumerate(batch.window.vertices):
                fh.write(f"{s},{vertex_label(v)},{format_float(row[i])}\n")


def field_sidecar(batch: FieldBatch) -> dict:
    """Reproducibility metadata for a sample file, including trajectory counts."""
    return {
        "schema": SCHEMA,
        "sampler": batch.sampler,
        "level": batch.level,
        "samples": batch.count,
        "window": {
            "hash": window_hash(batch.window),
            "vertices": batch.window.n,
            "generator": batch.window.generator.name if batch.window.generator else None,
            "radius": batch.window.radius,
        },
        "seed_record": dict(batch.seed_record),
        "trajectory_counts": [int(c) for c in batch.counts],
    }


def report_json_dict(report: TestReport) -> dict:
    d = report.to_json_dict()
    d["schema"] = SCHEMA
    return d


def write_report_csv(path, report: TestReport) -> None:
    """Plot-ready summary table, one row per check."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("check,observed,expected,se,tolerance,passed\n")
        for c in report.checks:
            se = format_float(c.se) if c.se is not None else ""
            name = c.name.replace('"', "'")
            fh.write(
                f'"{name}",{format_float(c.observed)},{format_float(c.expected)},'
                f"{se},{format_float(c.tolerance)},{int(c.passed)}\n"
            )


def read_config(path) -> dict:
    """Flat key-value pairs from a sectioned config file.

    Sections group related keys; names do not repeat across sections, so
    the result flattens to one dict of strings.
    """
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in flat:
                raise ValueError(f"config key {key!r} appears in more than one section")
            flat[key] = value
    return flat
