"""Monotone vertex programs driven by push-style edge functions."""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidWeight

INF = math.inf


@dataclass(frozen=True)
class VertexProgram:
    """A monotone edge function plus the values it starts from.

    ``better(a, b)`` is true when ``a`` strictly improves on ``b``; it is
    ``<`` for min-programs and ``>`` for max-programs.
    """

    name: str
    identity_value: float
    source_value: float
    edge_function: Callable[[float, float], float]
    better: Callable[[float, float], bool]
    min_weight: float = 0.0

    @property
    def minimizing(self) -> bool:
        return self.better(0.0, 1.0)

    def check_weight(self, weight: float) -> None:
        if weight < self.min_weight:
            raise InvalidWeight(f"{self.name} requires weights >= {self.min_weight}, got {weight}")


BFS = VertexProgram("bfs", INF, 0.0, lambda val, wt: val + 1.0, operator.lt)
SSSP = VertexProgram("sssp", INF, 0.0, lambda val, wt: val + wt, operator.lt)
SSWP = VertexProgram("sswp", 0.0, INF, min, operator.gt)
SSNP = VertexProgram("ssnp", INF, 0.0, max, operator.lt)
# dividing by weights >= 1 never amplifies a value, so gain cycles cannot form
VITERBI = VertexProgram("viterbi", 0.0, 1.0, lambda val, wt: val / wt, operator.gt, min_weight=1.0)

PROGRAMS = {p.name: p for p in (BFS, SSSP, SSWP, SSNP, VITERBI)}


def get_program(name: str) -> VertexProgram:
    try:
        return PROGRAMS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown algorithm {name!r}; choose from {', '.join(PROGRAMS)}") from None


def format_value(value: float) -> str:
    if value == INF:
        return "inf"
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))
