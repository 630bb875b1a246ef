"""Piecewise-linear profiles on a finite grid with an explicit tail tag.

A ``PiecewiseFn`` stores samples ``(x_i, v_i)`` with strictly increasing
``x_i`` and finite ``v_i``, interpolates linearly between nodes, and
describes behaviour past the last node by a tail tag:

* ``"infinite"``  -- the function is +inf beyond the last node, whose
  abscissa is then the domain end ``T0`` (the stored value at ``T0`` is
  the left limit);
* a finite slope -- the function continues linearly forever (``T0`` is
  +inf).

Infinity is carried only by the tail tag; grid values are always finite.
Evaluation below the first node extrapolates with the first segment's
slope; callers that need a hard domain cut (e.g. coefficient profiles
living on t >= 0) enforce it themselves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TAIL_INFINITE = "infinite"


def _as_grid_arrays(x, v):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.shape != v.shape or x.size == 0:
        raise ValidationError("grid must be a nonempty 1-d sequence of (x, value) pairs")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
        raise ValidationError("grid abscissae and values must be finite; "
                              "infinities belong in the tail tag")
    if x.size > 1 and not np.all(np.diff(x) > 0):
        raise ValidationError("grid abscissae must be strictly increasing")
    return x, v


@dataclass(frozen=True)
class PiecewiseFn:
    """Piecewise-linear function with a tagged tail.

    Attributes:
        x: node abscissae, strictly increasing.
        v: node values, finite.
        tail: ``"infinite"`` or a finite extrapolation slope.
    """

    x: np.ndarray
    v: np.ndarray
    tail: object = TAIL_INFINITE
    _slopes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x, v = _as_grid_arrays(self.x, self.v)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        if self.tail != TAIL_INFINITE:
            try:
                slope = float(self.tail)
            except (TypeError, ValueError):
                raise ValidationError(f"tail must be {TAIL_INFINITE!r} or a finite slope, "
                                      f"got {self.tail!r}") from None
            if not math.isfinite(slope):
                raise ValidationError("linear tail slope must be finite")
            object.__setattr__(self, "tail", slope)
        if x.size > 1:
            slopes = np.diff(v) / np.diff(x)
        else:
            slopes = np.zeros(0)
        object.__setattr__(self, "_slopes", slopes)

    # -- basic queries ------------------------------------------------

    @property
    def domain_end(self) -> float:
        """T0: the function is +inf strictly beyond this point."""
        return float(self.x[-1]) if self.tail == TAIL_INFINITE else math.inf

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    @property
    def v_end(self) -> float:
        return float(self.v[-1])

    @property
    def tail_slope(self) -> float:
        """Slope past the last node; +inf for an infinite tail."""
        return math.inf if self.tail == TAIL_INFINITE else float(self.tail)

    def __call__(self, q):
        """Evaluate at scalar or array q (vectorized, returns +inf past T0)."""
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        out = np.interp(q, self.x, self.v)
        if self.x.size > 1:
            below = q < self.x[0]
            if np.any(below):
                out[below] = self.v[0] + self._slopes[0] * (q[below] - self.x[0])
        above = q > self.x[-1]
        if np.any(above):
            if self.tail == TAIL_INFINITE:
                out[above] = math.inf
            else:
                out[above] = self.v[-1] + float(self.tail) * (q[above] - self.x[-1])
        return float(out[0]) if scalar else out

    def left_slopes(self) -> np.ndarray:
        """Left-derivative at each node (first node copies the first segment)."""
        if self.x.size == 1:
            return np.zeros(1)
        return np.concatenate(([self._slopes[0]], self._slopes))

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        t0 = self.domain_end
        return {
            "grid": [[float(a), float(b)] for a, b in zip(self.x, self.v)],
            "T0": "inf" if math.isinf(t0) else t0,
            "tail": TAIL_INFINITE if self.tail == TAIL_INFINITE else {"slope": float(self.tail)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "PiecewiseFn":
        try:
            grid = d["grid"]
            tail = d["tail"]
        except (KeyError, TypeError):
            raise ValidationError("profile JSON needs 'grid' and 'tail' fields") from None
        try:
            x = [row[0] for row in grid]
            v = [row[1] for row in grid]
        except (TypeError, IndexError):
            raise ValidationError("'grid' must be a list of [x, value] pairs") from None
        if tail == TAIL_INFINITE:
            fn = cls(np.asarray(x), np.asarray(v), TAIL_INFINITE)
        elif isinstance(tail, dict) and "slope" in tail:
            fn = cls(np.asarray(x), np.asarray(v), float(tail["slope"]))
        else:
            raise ValidationError(f"unrecognized tail tag {tail!r}")
        t0 = d.get("T0")
        if t0 is not None:
            declared = math.inf if t0 == "inf" else float(t0)
            if not math.isclose(declared, fn.domain_end, rel_tol=1e-12, abs_tol=1e-12):
                raise ValidationError(f"declared T0={declared} disagrees with tail/grid "
                                      f"(expected {fn.domain_end})")
        return fn

    @classmethod
    def from_json(cls, s: str) -> "PiecewiseFn":
        try:
            d = json.loads(s)
        except json.JSONDecodeError as e:
            raise ValidationError(f"profile JSON does not parse: {e}") from None
        return cls.from_json_dict(d)
