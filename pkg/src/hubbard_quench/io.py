"""Series containers and CSV/JSON emission.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.  Complex columns are split into ``name_re`` and
``name_im``.  Files are written to a temporary sibling and moved into place
with :func:`os.replace`, so a crash never leaves a partial artifact.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SCHEMA_VERSION = 1
FLOAT_FORMAT = ".17g"


class EmitError(ValueError):
    """Refused output request (empty or inconsistent series)."""


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """One named column sampled on the axis of its :class:`SeriesSet`."""

    name: str
    values: np.ndarray

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def columns(self) -> list[tuple[str, np.ndarray]]:
        v = np.asarray(self.values)
        if self.is_complex:
            return [(f"{self.name}_re", v.real), (f"{self.name}_im", v.imag)]
        return [(self.name, v)]


@dataclass(eq=False)
class SeriesSet:
    """Columns sharing one sampling axis (time or temperature)."""

    axis_name: str
    axis: np.ndarray
    series: list[CorrelationSeries] = field(default_factory=list)

    def add(self, name: str, values) -> None:
        values = np.asarray(values)
        if values.shape != np.shape(self.axis):
            raise EmitError(
                f"series {name!r} has {values.shape} samples, axis has {np.shape(self.axis)}"
            )
        if any(s.name == name for s in self.series):
            raise EmitError(f"duplicate series name {name!r}")
        self.series.append(CorrelationSeries(name, values))

    def header(self) -> list[str]:
        return [self.axis_name] + [c for s in self.series for c, _ in s.columns()]

    def table(self) -> np.ndarray:
        cols = [np.asarray(self.axis, dtype=float)]
        cols += [np.asarray(v, dtype=float) for s in self.series for _, v in s.columns()]
        return np.column_stack(cols)

    def check_nonempty(self) -> None:
        if len(self.axis) == 0 or not self.series:
            raise EmitError("refusing to emit an empty series set")


def format_float(x: float) -> str:
    return format(float(x), FLOAT_FORMAT)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def csv_text(header: Sequence[str], rows: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(x) for x in row])
    return buf.getvalue()


def write_csv(path: Path, series: SeriesSet) -> None:
    series.check_nonempty()
    atomic_write_text(path, csv_text(series.header(), series.table()))


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Header and float table of a file written by :func:`write_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def envelope(config: dict, provenance: dict, sets: dict[str, SeriesSet], summary: dict) -> dict:
    out_sets = {}
    for key, s in sets.items():
        s.check_nonempty()
        table = s.table()
        out_sets[key] = {
            "axis": s.axis_name,
            "columns": s.header(),
            "data": {c: table[:, i] for i, c in enumerate(s.header())},
        }
    return _jsonable(
        {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "provenance": provenance,
            "summary": summary,
            "series": out_sets,
        }
    )


def write_json(path: Path, document: dict) -> None:
    for key in ("schema_version", "config", "provenance", "series"):
        if key not in document:
            raise EmitError(f"JSON envelope is missing {key!r}")
    atomic_write_text(path, json.dumps(document, indent=2, allow_nan=False) + "\n")
