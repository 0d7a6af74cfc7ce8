"""Line-oriented scenario files.

A scenario either names a catalog builder::

    name demo
    builder counterexample I=grid(0,0.25,64) J=grid(0,0.25,64)
    [solver]
    tol = 1e-9

or spells the game out in sections::

    [states X]
    a b c
    [metric X]
    discrete 2
    [house X]
    a: 1 0 0 ; 0.5 0.25 0.25
    b: 0 1 0
    c: 0 0 1
    [payoff]
    0
    1
    0

``[states Y]``, ``[metric Y]`` and ``[house Y]`` describe Player 2; when they
are absent Player 2 sits on a single inert state. Metrics are ``discrete d``,
``line c1 c2 ...``, ``cycle`` or ``matrix`` followed by one row per line.
House lines list the generators of a state separated by ``;``. Lines
starting with ``#`` are comments.
"""

from dataclasses import dataclass, field

import numpy as np

from .builders import BUILDERS, build
from .core import GamblingGame, GamblingHouse, MetricSpace
from .errors import InputError

SOLVER_KEYS = {
    "tol": float, "game_tol": float, "check_tol": float, "reach_tol": float,
    "max_iter": int, "cap": int, "seed": int,
}
SECTIONS = ("states", "metric", "house", "payoff", "builder", "solver")


def _num(text):
    return repr(float(text))


@dataclass(eq=True)
class Scenario:
    """Parsed scenario in normal form.

    ``builder`` is ``(name, params)`` with string parameters, or ``None`` for
    an explicit game; ``states``, ``metrics`` and ``houses`` are keyed by
    ``"X"`` and ``"Y"``.
    """

    name: str = ""
    builder: tuple | None = None
    states: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    houses: dict = field(default_factory=dict)
    payoff: list | None = None
    solver: dict = field(default_factory=dict)

    def game(self):
        """The :class:`GamblingGame` described by the scenario."""
        if self.builder is not None:
            name, params = self.builder
            return build(name, **dict(params))
        if "X" not in self.states:
            raise InputError("explicit scenario needs a [states X] section")
        if self.payoff is None:
            raise InputError("explicit scenario needs a [payoff] section")
        h1 = self._house("X")
        if "Y" in self.states:
            h2 = self._house("Y")
            return GamblingGame(h1, h2, np.array(self.payoff, dtype=float), self.name)
        u = np.array(self.payoff, dtype=float)
        if u.shape != (h1.n, 1):
            raise InputError(f"one-player payoff needs {h1.n} rows of one entry, got {u.shape}")
        return GamblingGame.one_player(h1, u.ravel(), self.name)

    def _house(self, side):
        labels = self.states[side]
        kind, params = self.metrics.get(side, ("discrete", ["2.0"]))
        if kind == "discrete":
            space = MetricSpace.discrete(labels, float(params[0]) if params else 2.0)
        elif kind == "line":
            space = MetricSpace.line([float(c) for c in params], labels)
        elif kind == "cycle":
            space = MetricSpace.cycle(len(labels), labels)
        else:
            space = MetricSpace(labels, np.array(params, dtype=float))
        gens = self.houses.get(side)
        if gens is None:
            return GamblingHouse.static(space)
        missing = [s for s in labels if s not in gens]
        if missing:
            raise InputError(f"house {side} has no generators for {missing}")
        return GamblingHouse.from_arrays(space, [np.array(gens[s], dtype=float) for s in labels])

    def serialize(self):
        """Normal-form text; parsing it gives back an equal scenario."""
        out = []
        if self.name:
            out.append(f"name {self.name}")
        if self.builder is not None:
            name, params = self.builder
            out.append(" ".join(["builder", name] + [f"{k}={v}" for k, v in params]))
        for side in ("X", "Y"):
            if side in self.states:
                out += [f"[states {side}]", " ".join(self.states[side])]
            if side in self.metrics:
                kind, params = self.metrics[side]
                out.append(f"[metric {side}]")
                if kind == "matrix":
                    out.append("matrix")
                    out += [" ".join(_num(v) for v in row) for row in params]
                else:
                    out.append(" ".join([kind] + [_num(p) for p in params]))
            if side in self.houses:
                out.append(f"[house {side}]")
                for s in self.states[side]:
                    gens = self.houses[side][s]
                    out.append(f"{s}: " + " ; ".join(" ".join(_num(v) for v in g) for g in gens))
        if self.payoff is not None:
            out.append("[payoff]")
            out += [" ".join(_num(v) for v in row) for row in self.payoff]
        if self.solver:
            out.append("[solver]")
            out += [f"{k} = {self.solver[k]!r}" for k in sorted(self.solver)]
        return "\n".join(out) + "\n"


def _err(lineno, msg):
    return InputError(msg if lineno is None else f"line {lineno}: {msg}")


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise _err(lineno, f"malformed number in {' '.join(tokens)!r}") from None


def _builder_line(tokens, lineno):
    if not tokens:
        raise _err(lineno, "builder needs a name")
    name = tokens[0]
    if name not in BUILDERS:
        raise _err(lineno, f"unknown builder {name!r}; known: {', '.join(BUILDERS)}")
    params = []
    for t in tokens[1:]:
        if "=" not in t:
            raise _err(lineno, f"builder parameter {t!r} is not key=value")
        k, v = t.split("=", 1)
        if k not in BUILDERS[name][1]:
            raise _err(lineno, f"builder {name} has no parameter {k!r}")
        params.append((k, v))
    return name, tuple(params)


def parse_scenario(text):
    """Parse scenario text; errors name the offending line."""
    sc = Scenario()
    section, side = None, None
    metric_rows = {}
    payoff = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise _err(lineno, f"unterminated section header {line!r}")
            parts = line[1:-1].split()
            if not parts or parts[0] not in SECTIONS:
                raise _err(lineno, f"unknown section {line!r}")
            section = parts[0]
            side = parts[1] if len(parts) > 1 else None
            if section in ("states", "metric", "house"):
                if side not in ("X", "Y") or len(parts) != 2:
                    raise _err(lineno, f"section {section} needs X or Y")
                if section == "house":
                    sc.houses.setdefault(side, {})
            elif len(parts) != 1:
                raise _err(lineno, f"section {section} takes no argument")
            continue
        tokens = line.split()
        if section is None:
            if tokens[0] == "name":
                sc.name = " ".join(tokens[1:])
            elif tokens[0] == "builder":
                sc.builder = _builder_line(tokens[1:], lineno)
            else:
                raise _err(lineno, f"unknown key {tokens[0]!r}")
        elif section == "builder":
            sc.builder = _builder_line(tokens, lineno)
        elif section == "states":
            sc.states.setdefault(side, [])
            sc.states[side] += tokens
        elif section == "metric":
            if side not in sc.metrics:
                kind = tokens[0]
                if kind not in ("discrete", "line", "cycle", "matrix"):
                    raise _err(lineno, f"unknown metric {kind!r}")
                params = [] if kind == "matrix" else [repr(v) for v in _floats(tokens[1:], lineno)]
                sc.metrics[side] = (kind, params)
                metric_rows[side] = lineno
            elif sc.metrics[side][0] == "matrix":
                sc.metrics[side][1].append(_floats(tokens, lineno))
            else:
                raise _err(lineno, "metric already given")
        elif section == "house":
            if ":" not in line:
                raise _err(lineno, "house lines read 'state: g1 ; g2 ; ...'")
            label, rest = line.split(":", 1)
            label = label.strip()
            if label not in sc.states.get(side, []):
                raise _err(lineno, f"unknown state {label!r} in house {side}")
            n = len(sc.states[side])
            gens = []
            for chunk in rest.split(";"):
                vals = _floats(chunk.split(), lineno)
                if len(vals) != n:
                    raise _err(lineno, f"generator has {len(vals)} entries, expected {n}")
                gens.append(vals)
            sc.houses[side][label] = gens
        elif section == "payoff":
            payoff.append(_floats(tokens, lineno))
        elif section == "solver":
            if "=" not in line:
                raise _err(lineno, "solver lines read 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in SOLVER_KEYS:
                raise _err(lineno, f"unknown solver key {k!r}; known: {', '.join(SOLVER_KEYS)}")
            try:
                sc.solver[k] = SOLVER_KEYS[k](float(v)) if SOLVER_KEYS[k] is int else float(v)
            except ValueError:
                raise _err(lineno, f"malformed number {v!r}") from None
    if payoff:
        widths = {len(r) for r in payoff}
        if len(widths) != 1:
            raise InputError("payoff rows have different lengths")
        sc.payoff = payoff
    for side, (kind, params) in sc.metrics.items():
        if kind == "matrix":
            sc.metrics[side] = (kind, [list(map(float, r)) for r in params])
    if sc.builder is None and sc.states:
        try:
            sc.game()
        except InputError as exc:
            raise InputError(f"scenario does not describe a valid game: {exc}") from None
    return sc


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
