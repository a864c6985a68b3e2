"""Canonical report serialization: byte-identical output for identical runs.

JSON is emitted with insertion-ordered keys and floats printed to 9
significant digits; CSV cells use the same float format. Reports carry no
timestamps, so reruns with the same config produce the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

TOOL_VERSION = "0.1.0"


def format_float(value: float) -> str:
    """Fixed 9-significant-digit rendering used in all reports."""
    return f"{value:.9g}"


def canonical_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {canonical_json(v, indent + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{canonical_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, doc: dict) -> None:
    Path(path).write_text(canonical_json(doc) + "\n")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")
