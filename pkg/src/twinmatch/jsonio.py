"""Canonical JSON serialization for byte-reproducible output files.

Keys are emitted sorted, floats with 17 significant digits (enough to
round-trip any binary64 value exactly), and non-finite floats are
rejected so callers must map them to null explicitly.
"""

from __future__ import annotations

import json
import math

__all__ = ["dumps_canonical", "format_float"]


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized; map it to None first")
    return format(x, ".17g")


def _key_order(keys):
    for k in keys:
        if not isinstance(k, str):
            raise TypeError(f"object keys must be strings, got {type(k).__name__}")
    # all-numeric key sets (patch indices) sort numerically so "10" follows "2"
    if keys and all(k.isdigit() for k in keys):
        return sorted(keys, key=int)
    return sorted(keys)


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(_key_order(list(obj))):
            if i:
                out.append(", ")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Serialize to a canonical single-line JSON string with trailing newline."""
    out: list = []
    _encode(obj, out)
    out.append("\n")
    return "".join(out)
