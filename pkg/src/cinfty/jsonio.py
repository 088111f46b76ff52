"""Deterministic JSON output: floats with 17 significant digits, stable layout."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

SCHEMA = "cinfty/1"


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = "%.17g" % x
    if text in ("-0", "0"):
        return "0"
    return text


def _encode(obj: Any, indent: int, depth: int) -> str:
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, (float, Fraction)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, Fraction, str, bool)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, depth + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalars
        return _encode(obj.item(), indent, depth)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def report(command: str, body: dict) -> dict:
    out = {"schema": SCHEMA, "command": command}
    out.update(body)
    return out
