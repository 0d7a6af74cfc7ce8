"""Parameter sets for the one-parameter transition families (move probabilities)."""

import re
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class ActionSet:
    """A compact set of move parameters, materialized as sorted points.

    ``kind`` is one of ``grid`` (the interval ``[lo, hi]`` with ``n``
    subintervals), ``finite``, ``lacunary`` (``{base**-k, k = 1..depth} U {0}``)
    or ``union``. Solvers that can handle a continuum treat a ``grid`` as the
    whole interval; everything else uses the listed points.
    """

    kind: str
    params: tuple
    points: np.ndarray

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise InputError("an action set needs at least one point")
        if pts[0] < 0 or pts[-1] > 0.5:
            raise InputError("action parameters must lie in [0, 1/2]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def grid(cls, lo, hi, n):
        n = int(n)
        if n < 1 or not lo <= hi:
            raise InputError("grid needs lo <= hi and at least one subinterval")
        pts = np.linspace(lo, hi, n + 1)
        return cls("grid", (float(lo), float(hi), n), pts)

    @classmethod
    def finite(cls, values):
        vals = tuple(float(v) for v in values)
        return cls("finite", vals, np.array(vals))

    @classmethod
    def lacunary(cls, depth, base=4.0):
        depth = int(depth)
        if depth < 1:
            raise InputError("lacunary depth must be positive")
        pts = np.concatenate([[0.0], float(base) ** -np.arange(1, depth + 1)])
        return cls("lacunary", (depth, float(base)), pts)

    @classmethod
    def union(cls, *sets):
        pts = np.concatenate([s.points for s in sets])
        return cls("union", tuple(sets), pts)

    @property
    def lo(self):
        return float(self.points[0])

    @property
    def hi(self):
        return float(self.points[-1])

    @property
    def is_interval(self):
        return self.kind == "grid"

    @property
    def min_positive(self):
        pos = self.points[self.points > 0]
        return float(pos[0]) if pos.size else None

    def __len__(self):
        return self.points.size

    def __str__(self):
        if self.kind == "grid":
            lo, hi, n = self.params
            return f"grid({lo!r},{hi!r},{n})"
        if self.kind == "lacunary":
            depth, base = self.params
            return f"lacunary({depth})" if base == 4.0 else f"lacunary({depth},{base!r})"
        if self.kind == "union":
            return "+".join(str(s) for s in self.params)
        return "{" + ",".join(repr(v) for v in self.params) + "}"

    @classmethod
    def parse(cls, text):
        """Parse ``grid(lo,hi,n)``, ``lacunary(depth[,base])``, ``{a,b,...}``
        or ``finite(a,b,...)``; ``+`` joins several sets."""
        text = text.strip()
        if "+" in text:
            return cls.union(*(cls.parse(t) for t in text.split("+")))
        m = re.fullmatch(r"(\w+)\((.*)\)", text)
        try:
            if m:
                name, args = m.group(1), [a for a in m.group(2).split(",") if a.strip()]
                if name == "grid" and len(args) == 3:
                    return cls.grid(float(args[0]), float(args[1]), int(args[2]))
                if name == "lacunary" and len(args) in (1, 2):
                    return cls.lacunary(int(args[0]), *(float(a) for a in args[1:]))
                if name == "finite":
                    return cls.finite(float(a) for a in args)
            elif text.startswith("{") and text.endswith("}"):
                return cls.finite(float(a) for a in text[1:-1].split(",") if a.strip())
        except ValueError as exc:
            raise InputError(f"bad action set {text!r}: {exc}") from None
        raise InputError(f"cannot parse action set {text!r}")
