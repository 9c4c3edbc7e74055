"""Certification reports and their deterministic JSON form.

Reals are written with 17 significant digits so that every float survives a
dump/parse round trip; infinities use the ``Infinity`` token that Python's
json module reads back.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .criteria import Certificate, ComparisonVerdict


@dataclass
class Report:
    problem_name: str
    eta: float
    modulus_description: str
    certificates: list = field(default_factory=list)
    comparison: ComparisonVerdict | None = None
    trace_summary: dict | None = None

    def to_dict(self) -> dict:
        return {
            "problem_name": self.problem_name,
            "eta": self.eta,
            "modulus_description": self.modulus_description,
            "certificates": [c.to_dict() for c in self.certificates],
            "comparison": None if self.comparison is None else self.comparison.to_dict(),
            "trace_summary": None if self.trace_summary is None else dict(self.trace_summary),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        return cls(
            d["problem_name"],
            d["eta"],
            d["modulus_description"],
            [Certificate.from_dict(c) for c in d["certificates"]],
            None if d.get("comparison") is None else ComparisonVerdict.from_dict(d["comparison"]),
            d.get("trace_summary"),
        )

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    # keep a float marker so integral values parse back as float
    if not any(ch in text for ch in ".eE"):
        text += ".0"
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and 17-digit reals."""
    return _encode(obj, indent, 0) + "\n"
