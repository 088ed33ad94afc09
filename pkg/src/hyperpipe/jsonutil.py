"""Canonical JSON text: sorted keys, 17-significant-digit floats.

Serialize -> parse -> serialize is byte-identical, which is what result files,
cache keys and determinism comparisons rely on.
"""

from __future__ import annotations

import json
import math

import numpy as np


def _format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError("non-finite float cannot be serialized canonically")
    if v == 0.0:
        return "0"  # normalizes -0.0
    return format(v, ".17g")


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out)
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            if not isinstance(key, str):
                raise TypeError(f"canonical JSON requires string keys, got {key!r}")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot canonically serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out)


def canonical_json_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")
