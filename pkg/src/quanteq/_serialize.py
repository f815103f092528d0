"""Deterministic JSON/CSV emission.

Reals are printed with 17 significant digits (full double round-trip), key
order is insertion order, and non-finite values map to JSON null, so a given
payload always serialises to the same bytes.
"""

from __future__ import annotations

import math
from typing import Any, Iterable, Sequence


def format_real(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        return "null"
    return format(float(x), ".17g")


def _emit(obj: Any) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_real(obj)
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch == '"':
                out.append('\\"')
            elif ch == "\\":
                out.append("\\\\")
            elif ord(ch) < 0x20:
                out.append(f"\\u{ord(ch):04x}")
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, dict):
        parts = [f"{_emit(str(k))}: {_emit(v)}" for k, v in obj.items()]
        return "{" + ", ".join(parts) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Serialise to a single deterministic JSON line (plus newline)."""
    return _emit(obj) + "\n"


def csv_line(fields: Iterable[Any]) -> str:
    parts = []
    for f in fields:
        if isinstance(f, float):
            parts.append("" if not math.isfinite(f) else format_real(f))
        elif f is None:
            parts.append("")
        else:
            parts.append(str(f))
    return ",".join(parts) + "\n"


def csv_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    out = [csv_line(header)]
    out.extend(csv_line(r) for r in rows)
    return "".join(out)
