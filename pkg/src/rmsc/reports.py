"""Output writers and validation against the schemas shipped in ``rmsc/schemas``."""
from __future__ import annotations

import csv
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("rmsc.schemas").joinpath(name).read_text())


def validate_report(report: dict) -> None:
    jsonschema.validate(report, load_schema("report.schema.json"))


def validate_config(config: dict) -> None:
    jsonschema.validate(config, load_schema("config.schema.json"))


def validate_manifest(manifest: dict) -> None:
    jsonschema.validate(manifest, load_schema("manifest.schema.json"))


def fmt(x) -> str:
    """Shortest text that round-trips ``x``; ``nan`` for missing values."""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _check_cell(value: str, kind: str, where: str):
    try:
        x = float(value)
    except ValueError:
        raise ValueError(f"{where}: {value!r} is not a number") from None
    if kind == "integer" and not (math.isfinite(x) and x == int(x) and "." not in value):
        raise ValueError(f"{where}: {value!r} is not an integer")
    return x


def validate_csv(path, kind: str = None) -> int:
    """Check a CSV output against its schema; returns the number of data rows.

    ``kind`` defaults to the file name (``sweep.csv``, ``trace.csv``, ...).
    """
    path = Path(path)
    schema = load_schema("csv.schema.json")[kind or path.name]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: missing header row")
    header, body = rows[0], rows[1:]
    if "columns" in schema:
        expected = [c["name"] for c in schema["columns"]]
        if header != expected:
            raise ValueError(f"{path}: header {header} != {expected}")
        types = [c["type"] for c in schema["columns"]]
    else:
        spec = schema["indexed_columns"]
        if header != [str(i) for i in range(len(header))]:
            raise ValueError(f"{path}: header must be 0..n-1 sample indices")
        types = [spec["type"]] * len(header)
    for r, row in enumerate(body, start=2):
        if len(row) != len(types):
            raise ValueError(f"{path}: row {r} has {len(row)} cells, expected {len(types)}")
        for c, (cell, kind_) in enumerate(zip(row, types), start=1):
            x = _check_cell(cell, kind_, f"{path}:{r}:{c}")
            if "indexed_columns" in schema and x < schema["indexed_columns"].get("minimum", -math.inf):
                raise ValueError(f"{path}:{r}:{c}: {x} below minimum")
    return len(body)
