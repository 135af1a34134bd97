# format.py
from __future__ import annotations

import math
from typing import Any
from typing import Iterable
from typing import Sequence

from ldcross.constants import SEPARATOR


def real(x: float) -> str:
    """Round-trippable text for a float; infinities as `inf`."""
    if math.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return repr(float(x))


def value(v: Any) -> str:
    if v is None:
        return 'none'
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return real(v)
    if isinstance(v, (tuple, list)):
        return ', '.join(value(i) for i in v)
    return str(v)


def stringify(items: dict[str, Any], sep: str = SEPARATOR) -> list[str]:
    return [f'{k:<18}{sep} {value(v)}' for k, v in items.items()]


def record(items: dict[str, Any]) -> str:
    return '\n'.join(stringify(items)) + '\n'


def table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> list[list[str]]:
    return [list(header), *([value(c) for c in row] for row in rows)]


def relative_gap(estimate: float, reference: float) -> float:
    if reference == 0:
        return math.inf if estimate != 0 else 0.0
    return abs(estimate - reference) / abs(reference)
