"""JSON and CSV report output.

Floats are written with 17 significant digits, keys in sorted order and no
timestamps, so identical inputs give byte-identical files. Files are written
to a temporary sibling and renamed into place; a failed run never leaves a
truncated report behind.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

SCHEMA = 1

__all__ = ["SCHEMA", "to_json", "atomic_write", "orbit_csv", "rows_csv"]


def _float(v):
    if math.isnan(v) or math.isinf(v):
        return "null"
    text = format(v, ".17g")
    if not any(c in text for c in ".e"):
        text += ".0"
    return text


def _emit(obj, out, indent, depth):
    pad = "\n" + " " * (indent * (depth + 1))
    end = "\n" + " " * (indent * depth)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        _emit([obj.real, obj.imag], out, indent, depth)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            out.append(("," if i else "") + pad + json.dumps(str(key)) + ": ")
            _emit(obj[key], out, indent, depth + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(items):
            out.append(("," if i else "") + pad)
            _emit(item, out, indent, depth + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent=2):
    out = []
    _emit(obj, out, indent, 0)
    return "".join(out) + "\n"


def atomic_write(path, text):
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def orbit_csv(records):
    """``x, y, period, z1, z2, residual`` per orbit record."""
    return rows_csv(("x", "y", "period", "z1", "z2", "residual"),
                    [(float(r.point.x), float(r.point.y), r.period, r.lattice[0], r.lattice[1],
                      float(r.residual)) for r in records])
