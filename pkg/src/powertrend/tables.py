"""CSV/JSON emission shared by every exporter.

Floats are written with ``repr`` so output is exact and byte-stable; NaN and
None become empty CSV cells / JSON null.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence


def cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def to_csv(columns: Sequence[str], rows: Iterable[Mapping], header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(columns: Sequence[str], rows: Iterable[Mapping], header: str | None = None) -> str:
    records = [{c: _jsonable(row.get(c)) for c in columns} for row in rows]
    doc = {"generated": header, "rows": records} if header else records
    return json.dumps(doc, indent=2) + "\n"
