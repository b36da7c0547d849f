"""Deterministic run-report serialization for the experiment harness.

A :class:`RunReport` bundles everything one command execution produced: the
fully resolved configuration, a fixed-column record table, summary statistics,
the wall-clock duration, and the library version.  Reports are written as

* ``<out>/<command>.json`` — the report itself.  Record rows are embedded
  when the run format is ``json``; otherwise the JSON carries a pointer to
  the CSV file.  High-precision values appear as explicit decimal or ``p/q``
  strings so nothing is lost to binary floats.
* ``<out>/<command>.csv`` — the record table (format ``csv`` only),
  RFC-4180-style: UTF-8, CRLF line endings, ``.`` decimal separator, and a
  fixed column order per command.  Identical configuration yields a
  byte-identical CSV body.
* ``<out>/<command>.meta.json`` — the only file holding timestamps, so
  rerunning a configuration never perturbs the data artifacts.
"""

from __future__ import annotations

import csv
import datetime as _dt
import enum
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import mpmath
import numpy as np

__all__ = [
    "RunReport",
    "json_scalar",
    "render_csv",
    "write_report",
]

Cell = Union[None, bool, int, float, str]


def json_scalar(value: object) -> object:
    """Convert ``value`` to a JSON-safe scalar (or container of scalars).

    Exact rationals become ``"p/q"`` strings, arbitrary-precision floats
    become 30-digit decimal strings, numpy scalars collapse to Python ones,
    and enums report their ``value``.  Containers are converted recursively;
    mapping keys are coerced to strings.
    """
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, mpmath.mpf):
        return mpmath.nstr(value, 30, strip_zeros=True)
    if isinstance(value, enum.Enum):
        return json_scalar(value.value)
    if isinstance(value, np.generic):
        return json_scalar(value.item())
    if isinstance(value, np.ndarray):
        return [json_scalar(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): json_scalar(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_scalar(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def _csv_cell(value: object) -> str:
    """Render one cell: empty for None, repr-shortest floats, str otherwise."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.generic):
        return _csv_cell(value.item())
    return str(value)


def render_csv(columns: Sequence[str], records: Sequence[Sequence[object]]) -> str:
    """The full CSV text (header + rows) for a record table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in records:
        if len(row) != len(columns):
            raise ValueError(
                f"record width {len(row)} does not match {len(columns)} columns"
            )
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


@dataclass(frozen=True)
class RunReport:
    """One command execution: resolved config, records, summary, timing."""

    command: str
    config: dict
    columns: tuple[str, ...]
    records: tuple[tuple, ...]
    summary: dict
    wall_clock_seconds: float
    version: str
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_jsonable(self, *, embed_records: bool = True) -> dict:
        doc = {
            "command": self.command,
            "config": json_scalar(self.config),
            "columns": list(self.columns),
            "summary": json_scalar(self.summary),
            "n_records": len(self.records),
            "wall_clock_seconds": self.wall_clock_seconds,
            "version": self.version,
            "notes": list(self.notes),
        }
        if embed_records:
            doc["records"] = [
                [json_scalar(v) for v in row] for row in self.records
            ]
        return doc

    def csv_body(self) -> str:
        return render_csv(self.columns, self.records)


def write_report(
    report: RunReport,
    out_dir: Union[str, Path],
    fmt: str = "csv",
) -> dict[str, Path]:
    """Write the report under ``out_dir``; returns the paths written.

    ``fmt="csv"`` puts records in ``<command>.csv`` and leaves the JSON
    report pointing at it; ``fmt="json"`` embeds the records in the JSON.
    A ``<command>.meta.json`` sidecar holds the write timestamp.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}

    doc = report.to_jsonable(embed_records=(fmt == "json"))
    if fmt == "csv":
        csv_path = out / f"{report.command}.csv"
        csv_path.write_bytes(report.csv_body().encode("utf-8"))
        paths["csv"] = csv_path
        doc["records_file"] = csv_path.name

    json_path = out / f"{report.command}.json"
    json_path.write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    paths["json"] = json_path

    meta_path = out / f"{report.command}.meta.json"
    meta = {
        "written_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "command": report.command,
        "files": sorted(p.name for p in paths.values()),
    }
    meta_path.write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    paths["meta"] = meta_path
    return paths


def read_report(path: Union[str, Path]) -> dict:
    """Load a previously written ``<command>.json`` report document."""
    p = Path(path)
    doc = json.loads(p.read_text(encoding="utf-8"))
    if "records" not in doc and "records_file" in doc:
        csv_path = p.parent / doc["records_file"]
        rows = list(csv.reader(io.StringIO(csv_path.read_text(encoding="utf-8"))))
        doc["records"] = rows[1:]
    return doc


def utc_now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()
