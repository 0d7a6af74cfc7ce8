"""Data model for finite gambling games and the Kantorovich-Rubinstein metric.

Value functions are plain ``numpy`` arrays of shape ``(|X|, |Y|)``; a
one-player problem uses ``|Y| = 1``. Distributions are weight vectors over a
:class:`MetricSpace`; the :class:`Distribution` wrapper validates them at the
API boundary while inner loops work on raw arrays.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError
from .lp import FEAS_TOL, find_convex_weights, solve_lp

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CheckResult:
    """Outcome of a verification predicate.

    ``violation`` is the worst observed violation (0 when nothing was
    violated), ``witness`` identifies where it occurred and ``details`` holds
    per-item diagnostics.
    """

    passed: bool
    violation: float = 0.0
    witness: object = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.passed)


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite labelled point set with a distance matrix.

    ``coords`` optionally records 1-D positions when the distance is
    ``|coords[i] - coords[j]|``; the transport solver then uses the cumulative
    distribution formula instead of a linear program.
    """

    labels: tuple
    dist: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        dist = np.array(self.dist, dtype=float)
        object.__setattr__(self, "labels", labels)
        n = len(labels)
        if n == 0:
            raise InputError("a metric space needs at least one point")
        if len(set(labels)) != n:
            raise InputError("state labels must be distinct")
        if dist.shape != (n, n):
            raise InputError(f"distance matrix must be {n}x{n}, got {dist.shape}")
        if not np.all(np.isfinite(dist)) or (dist < 0).any():
            raise InputError("distances must be finite and nonnegative")
        if not np.allclose(dist, dist.T, rtol=0, atol=1e-12):
            raise InputError("distance matrix is not symmetric")
        if np.any(np.diag(dist) != 0):
            raise InputError("distance matrix must vanish on the diagonal")
        off = dist + np.eye(n)
        if (off <= 0).any():
            raise InputError("distinct points must be at positive distance")
        scale = max(1.0, dist.max())
        # d[i,k] <= d[i,j] + d[j,k] for all triples
        via = dist[:, :, None] + dist[None, :, :]
        if (dist[:, None, :] > via + 1e-12 * scale).any():
            raise InputError("distance matrix violates the triangle inequality")
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float).ravel()
            if c.size != n or not np.allclose(np.abs(c[:, None] - c[None, :]), dist, atol=1e-12):
                raise InputError("coords do not reproduce the distance matrix")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n(self):
        return len(self.labels)

    def index(self, label):
        """Index of a state given its label or an integer index."""
        if isinstance(label, (int, np.integer)):
            if not 0 <= int(label) < self.n:
                raise InputError(f"state index {label} out of range")
            return int(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InputError(f"unknown state {label!r}") from None

    @cached_property
    def uniform_distance(self):
        """Common off-diagonal distance if the metric is discrete, else None."""
        if self.n == 1:
            return 1.0
        off = self.dist[~np.eye(self.n, dtype=bool)]
        return float(off[0]) if np.all(off == off[0]) else None

    @classmethod
    def discrete(cls, labels, d=2.0):
        n = len(labels)
        return cls(tuple(labels), d * (1.0 - np.eye(n)))

    @classmethod
    def line(cls, coords, labels=None):
        c = np.asarray(coords, dtype=float)
        if labels is None:
            labels = [f"{v:.12g}" for v in c]
        return cls(tuple(labels), np.abs(c[:, None] - c[None, :]), coords=c)

    @classmethod
    def cycle(cls, n, labels=None):
        """Shortest-path metric on a cycle graph with ``n`` nodes."""
        i = np.arange(n)
        gap = np.abs(i[:, None] - i[None, :])
        dist = np.minimum(gap, n - gap).astype(float)
        return cls(tuple(labels or [str(k) for k in range(n)]), dist)


def _weights(space, p):
    """Raw weight vector of ``p`` (Distribution or array) checked against space."""
    if isinstance(p, Distribution):
        if p.space.n != space.n:
            raise InputError("distribution lives on a different space")
        return p.weights
    w = np.asarray(p, dtype=float).ravel()
    if w.size != space.n:
        raise InputError(f"expected {space.n} weights, got {w.size}")
    return w


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability weights over the points of a metric space."""

    space: MetricSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size != self.space.n:
            raise InputError(f"expected {self.space.n} weights, got {w.size}")
        if not np.all(np.isfinite(w)) or (w < -NORM_TOL).any():
            raise InputError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise InputError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def dirac(cls, space, i):
        w = np.zeros(space.n)
        w[space.index(i)] = 1.0
        return cls(space, w)

    @classmethod
    def uniform(cls, space):
        return cls(space, np.full(space.n, 1.0 / space.n))

    def is_dirac(self, i, tol=NORM_TOL):
        return abs(self.weights[self.space.index(i)] - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class TransitionPolytope:
    """Convex hull of finitely many distributions on one space."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise InputError("a transition polytope needs at least one generator")
        space = gens[0].space
        if any(g.space is not space and g.space.n != space.n for g in gens):
            raise InputError("generators live on different spaces")
        object.__setattr__(self, "generators", gens)

    @property
    def space(self):
        return self.generators[0].space

    @cached_property
    def matrix(self):
        """Generators stacked as rows, shape ``(k, n)``."""
        m = np.array([g.weights for g in self.generators])
        m.setflags(write=False)
        return m

    def __len__(self):
        return len(self.generators)


@dataclass(frozen=True, eq=False)
class GamblingHouse:
    """A state space and one transition polytope per state."""

    space: MetricSpace
    transitions: tuple

    def __post_init__(self):
        trans = tuple(self.transitions)
        if len(trans) != self.space.n:
            raise InputError(f"need {self.space.n} transition sets, got {len(trans)}")
        for t in trans:
            if t.space.n != self.space.n:
                raise InputError("transition generators live on a different space")
        object.__setattr__(self, "transitions", trans)

    @classmethod
    def from_arrays(cls, space, generator_lists):
        """Build from one ``(k_x, n)`` array (or list of rows) per state."""
        trans = []
        for rows in generator_lists:
            rows = np.atleast_2d(np.asarray(rows, dtype=float))
            trans.append(TransitionPolytope(tuple(Distribution(space, r) for r in rows)))
        return cls(space, tuple(trans))

    @classmethod
    def static(cls, space):
        """House in which every state can only stay put."""
        return cls.from_arrays(space, [np.eye(space.n)[i] for i in range(space.n)])

    @property
    def n(self):
        return self.space.n

    def generators(self, x):
        """Generator matrix of the polytope at state ``x`` (label or index)."""
        return self.transitions[self.space.index(x)].matrix

    @cached_property
    def counts(self):
        return np.array([len(t) for t in self.transitions])

    @cached_property
    def padded(self):
        """Tensor ``(n, K, n)`` of generators, short lists padded by repetition."""
        K = int(self.counts.max())
        out = np.empty((self.n, K, self.n))
        for i, t in enumerate(self.transitions):
            m = t.matrix
            out[i, :len(m)] = m
            out[i, len(m):] = m[0]
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class GamblingGame:
    """Two houses coupled by a running payoff ``u`` (Player 1 maximizes)."""

    house1: GamblingHouse
    house2: GamblingHouse
    payoff: np.ndarray
    name: str = ""

    def __post_init__(self):
        u = np.array(self.payoff, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if u.shape != (self.house1.n, self.house2.n):
            raise InputError(
                f"payoff must be {self.house1.n}x{self.house2.n}, got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise InputError("payoff entries must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "payoff", u)

    @classmethod
    def one_player(cls, house, u, name=""):
        """Game in which Player 2 sits on a single inert state."""
        solo = MetricSpace(("*",), np.zeros((1, 1)))
        return cls(house, GamblingHouse.static(solo), np.asarray(u, float).reshape(-1, 1), name)

    @property
    def shape(self):
        return self.payoff.shape

    @property
    def u_min(self):
        return float(self.payoff.min())

    @property
    def u_max(self):
        return float(self.payoff.max())

    def mirrored(self):
        """Same game with the roles of the players exchanged (payoff ``-u.T``)."""
        return GamblingGame(self.house2, self.house1, -self.payoff.T, self.name + "~")


def affine_eval(v, p, q):
    """Bilinear extension ``sum_x sum_y p(x) q(y) v(x, y)``."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    p = p.weights if isinstance(p, Distribution) else np.asarray(p, dtype=float).ravel()
    q = q.weights if isinstance(q, Distribution) else np.asarray(q, dtype=float).ravel()
    if p.size != v.shape[0] or q.size != v.shape[1]:
        raise InputError(f"distributions of sizes {p.size},{q.size} do not fit {v.shape}")
    return float(p @ v @ q)


def _transport_lp(dist, p, q):
    """Optimal transport cost between weight vectors via a transportation LP."""
    diff = p - q
    src = np.flatnonzero(diff > 0)
    dst = np.flatnonzero(diff < 0)
    if src.size == 0 or dst.size == 0:
        return 0.0
    a, b = diff[src], -diff[dst]
    b = b * (a.sum() / b.sum())
    ns, nd = src.size, dst.size
    cost = dist[np.ix_(src, dst)].ravel()
    A_eq = np.zeros((ns + nd, ns * nd))
    for i in range(ns):
        A_eq[i, i * nd:(i + 1) * nd] = 1.0
    for j in range(nd):
        A_eq[ns + j, j::nd] = 1.0
    res = solve_lp(cost, A_eq=A_eq[:-1], b_eq=np.concatenate([a, b])[:-1])
    if not res.success:
        raise ArithmeticError(f"transport LP failed: {res.status}")
    return max(res.fun, 0.0)


def kr_distance(space, p, q, method="auto"):
    """Kantorovich-Rubinstein (Wasserstein-1) distance between two distributions.

    ``method="lp"`` always solves the transportation program. ``"auto"`` uses
    exact shortcuts when the metric allows: ``(d/2) * ||p - q||_1`` for a
    uniform discrete metric and the cumulative-distribution integral for
    points on a line.
    """
    pw, qw = _weights(space, p), _weights(space, q)
    if method == "auto":
        d = space.uniform_distance
        if d is not None:
            return 0.5 * d * float(np.abs(pw - qw).sum())
        if space.coords is not None:
            order = np.argsort(space.coords)
            c = space.coords[order]
            cdf = np.cumsum(pw[order] - qw[order])[:-1]
            return float(np.abs(cdf) @ np.diff(c))
    elif method != "lp":
        raise InputError(f"unknown method {method!r}")
    return _transport_lp(space.dist, pw, qw)


def kr_to_polytope(space, p, G, method="auto"):
    """Smallest KR distance from ``p`` to the convex hull of the rows of ``G``.

    Returns ``(distance, weights)`` where ``weights`` is a convex combination of
    the rows attaining it. Transport and membership variables are combined in
    a single linear program.
    """
    pw = _weights(space, p)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    k, n = G.shape
    if k == 1:
        return kr_distance(space, pw, G[0], method), np.ones(1)
    d = space.uniform_distance if method == "auto" else None
    if d is not None or (method == "auto" and space.coords is not None):
        if d is not None:
            # min (d/2) sum s  s.t.  s >= +-(p - G.T w)
            M, rhs, wts = np.eye(n), pw, np.full(n, 0.5 * d)
        else:
            order = np.argsort(space.coords)
            M = np.tril(np.ones((n, n)))[:-1][:, np.argsort(order)]
            rhs, wts = M @ pw, np.diff(space.coords[order])
        r = M.shape[0]
        MG = M @ G.T
        c = np.concatenate([np.zeros(k), wts])
        A_ub = np.block([[-MG, -np.eye(r)], [MG, -np.eye(r)]])
        b_ub = np.concatenate([-rhs, rhs])
        A_eq = np.concatenate([np.ones(k), np.zeros(r)])[None, :]
        res = solve_lp(c, A_ub, b_ub, A_eq, [1.0])
    else:
        # flow formulation: f_ij >= 0 moves mass i -> j, net outflow = p - G.T w
        D = space.dist
        c = np.concatenate([np.zeros(k), D.ravel()])
        A_eq = np.zeros((n + 1, k + n * n))
        for i in range(n):
            A_eq[i, k + i * n:k + (i + 1) * n] += 1.0
            A_eq[i, k + i::n] -= 1.0
        A_eq[:n, :k] = G.T
        A_eq[n, :k] = 1.0
        res = solve_lp(c, A_eq=A_eq, b_eq=np.concatenate([pw, [1.0]]))
    if not res.success:
        raise ArithmeticError(f"projection LP failed: {res.status}")
    w = np.maximum(res.x[:k], 0.0)
    return max(res.fun, 0.0), w / w.sum()


def contains(G, target, tol=FEAS_TOL):
    """True when ``target`` lies in the convex hull of the rows of ``G`` within tol."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    t = np.asarray(target, dtype=float).ravel()
    if np.abs(G - t).max(axis=1).min() <= tol:
        return True
    _, err = find_convex_weights(G, t, tol)
    return err <= tol


def check_leavable(house, tol=FEAS_TOL):
    """Does every polytope contain the Dirac mass of its own state?"""
    bad = {}
    for i in range(house.n):
        e = np.eye(house.n)[i]
        G = house.generators(i)
        if np.abs(G - e).max(axis=1).min() <= tol:
            continue
        _, err = find_convex_weights(G, e, tol)
        if err > tol:
            bad[house.space.labels[i]] = err
    if not bad:
        return CheckResult(True)
    worst = max(bad, key=bad.get)
    return CheckResult(False, bad[worst], worst, {"failing_states": bad})


def check_nonexpansive(house, tol=FEAS_TOL):
    """Is every state's polytope 1-Lipschitz in the Hausdorff-KR sense?

    For each ordered pair ``(x, x')`` and generator ``g`` of ``Gamma(x)`` the
    distance from ``g`` to ``Gamma(x')`` must not exceed ``d(x, x')``.
    """
    space = house.space
    worst, witness = -np.inf, None
    for i in range(house.n):
        for j in range(house.n):
            if i == j:
                continue
            Gj = house.generators(j)
            for gi, g in enumerate(house.generators(i)):
                dist, _ = kr_to_polytope(space, g, Gj)
                excess = dist - space.dist[i, j]
                if excess > worst:
                    worst, witness = excess, (space.labels[i], space.labels[j], gi)
    if witness is None:
        return CheckResult(True)
    ok = worst <= tol
    return CheckResult(ok, max(worst, 0.0), None if ok else witness,
                       {"worst_excess": worst, "worst_pair": witness})
