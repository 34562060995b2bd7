"""Deterministic CSV/JSON emission.

Floats go to CSV with 17 significant digits (lossless for binary64) and to
JSON through ``repr``. Files are written to a temporary sibling and renamed
into place so a reader never sees a partial file.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import os
import tempfile
from pathlib import Path

import numpy as np

OUTPUT_ENV = "OMORIYAU_OUTPUT_DIR"


def output_dir(flag: str | None) -> Path:
    """Flag wins, then the environment override, then the working directory."""
    path = Path(flag or os.environ.get(OUTPUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def plain(obj):
    """Convert dataclasses, enums and numpy values into JSON-ready builtins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2) + "\n"


def format_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_cell(c) for c in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_csv(path) -> tuple[list, list]:
    """Inverse of :func:`csv_text` for numeric tables."""
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    rows = []
    for line in text[1:]:
        row = []
        for cell in line.split(","):
            try:
                row.append(int(cell))
            except ValueError:
                row.append(float(cell))
        rows.append(row)
    return header, rows


def write_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: Path, obj) -> Path:
    return write_atomic(path, dumps(obj))


def write_csv(path: Path, header, rows) -> Path:
    return write_atomic(path, csv_text(header, rows))
