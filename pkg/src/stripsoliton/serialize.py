"""Deterministic CSV and JSON writers.

All floats go out with 17 significant digits so round-trips are exact
and byte-level reproducibility holds across runs.  Infinite half-widths
are written as the string ``inf``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(value) -> str:
    """Render one cell: floats at 17 significant digits, rest via str."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    """Write rows of cells with a header line; LF endings, no quoting."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def json_ready(obj):
    """Recursively convert numpy scalars and infinities for JSON output."""
    if isinstance(obj, dict):
        return {k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_json(path, obj) -> None:
    """Write JSON with stable key order (insertion order, never resorted)."""
    path = Path(path)
    path.write_text(json.dumps(json_ready(obj), indent=2) + "\n", encoding="ascii")
