"""Built-in catalog of named data fields for problem definitions.

Configs refer to data by name so runs stay reproducible without an expression
parser. Domain and boundary fields resolve to callables f(x, y); boundary
flux data may also be given per side ("per_side:right=-1") to express values
that jump at corners of the square.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .mesh import SIDES

FieldFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _sine(a: float, b: float) -> FieldFn:
    def fn(x, y):
        return a + b * np.sin(math.pi * x) * np.sin(math.pi * y)
    return fn


_PLAIN_FIELDS: dict[str, FieldFn] = {
    "zero": lambda x, y: np.zeros_like(np.asarray(x, dtype=float)),
    "one": lambda x, y: np.ones_like(np.asarray(x, dtype=float)),
    "linear_x": lambda x, y: np.asarray(x, dtype=float) + 0.0 * np.asarray(y),
    "linear_y": lambda x, y: np.asarray(y, dtype=float) + 0.0 * np.asarray(x),
    # Smooth bump used as a generic target field.
    "manufactured_1": _sine(0.0, 1.0),
}


def resolve_field(spec) -> FieldFn:
    """Resolve a catalog name, a number, or a callable into a field f(x, y).

    Recognized names: zero, one, linear_x, linear_y, manufactured_1,
    constant:<c>, sine:<a>,<b>  (meaning a + b*sin(pi x)sin(pi y)).
    """
    if callable(spec):
        return spec
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda x, y: np.full_like(np.asarray(x, dtype=float), value)
    if not isinstance(spec, str):
        raise ValueError(f"cannot resolve data spec {spec!r}")
    name = spec.strip()
    if name in _PLAIN_FIELDS:
        return _PLAIN_FIELDS[name]
    if name.startswith("constant:"):
        value = float(name.split(":", 1)[1])
        return lambda x, y: np.full_like(np.asarray(x, dtype=float), value)
    if name.startswith("sine:"):
        parts = name.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ValueError(f"sine data takes two parameters, got {name!r}")
        return _sine(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown data field {name!r}")


def resolve_boundary_data(spec):
    """Resolve boundary data: everything resolve_field accepts, plus
    per-side values "per_side:right=-1,top=0" (unlisted sides default to 0).
    """
    if isinstance(spec, dict):
        return {side: resolve_field(value) for side, value in spec.items()}
    if isinstance(spec, str) and spec.strip().startswith("per_side:"):
        body = spec.strip().split(":", 1)[1]
        values: dict[str, float] = {}
        for item in body.split(","):
            if not item.strip():
                continue
            side, _, raw = item.partition("=")
            side = side.strip()
            if side not in SIDES:
                raise ValueError(f"unknown side {side!r} in {spec!r}")
            values[side] = float(raw)
        return values
    return resolve_field(spec)
