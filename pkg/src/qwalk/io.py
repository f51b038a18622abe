"""Deterministic JSON/CSV report files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "OUTPUT_DIR_ENV",
    "format_float",
    "dumps_report",
    "loads_report",
    "csv_text",
    "atomic_write",
    "resolve_output",
]

OUTPUT_DIR_ENV = "QWALK_OUTPUT_DIR"


def format_float(x: float) -> str:
    """17 significant digits, which round-trips every double exactly."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    s = format(x, ".17g")
    # keep integral values recognisable as floats when read back
    return s if any(c in s for c in ".en") else s + ".0"


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # flat numeric lists stay on one line
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_report(command: str, params: dict, data: dict, version: str) -> str:
    """``{"meta": {...}, "data": {...}}`` with sorted keys and fixed float format."""
    doc = {"meta": {"command": command, "params": params, "version": version}, "data": data}
    return _encode(doc, 2, 0) + "\n"


def loads_report(text: str) -> dict:
    return json.loads(text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(
            [format_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
        )
    return buf.getvalue()


def resolve_output(path: str | os.PathLike | None, default_name: str) -> Path:
    """Relative paths (and the default name) live under ``$QWALK_OUTPUT_DIR`` if set."""
    root = os.environ.get(OUTPUT_DIR_ENV)
    p = Path(default_name if path is None else path)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
