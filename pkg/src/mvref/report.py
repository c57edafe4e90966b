"""JSON report writer with fixed 17-significant-digit floats.

``json.dumps`` always uses the shortest repr; reports instead pin the float
format so output is independent of repr heuristics and round-trips exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _emit(obj: Any, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, value) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key), ensure_ascii=False)}: ")
            _emit(value, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, np.number, bool)) or v is None for v in obj):
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level + 1, parts)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
            return
        out.append("[\n")
        for k, value in enumerate(obj):
            out.append(pad)
            _emit(value, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"
