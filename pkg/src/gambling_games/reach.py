"""Reachable distributions, idempotency and acyclicity potentials.

A polytope of distributions is stored by its vertex array. The image of a
polytope ``P`` under the linear extension of a house is
``U_{p in P} sum_x p(x) Gamma(x)``; its support function in direction ``c`` is
``max_{v vertex of P} sum_x v(x) max_{g in Gamma(x)} g @ c``, which is what
the facet refinement in :mod:`polytope` consumes.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import CheckResult, Distribution, check_leavable, contains, kr_to_polytope
from .errors import InputError, NumericalError
from .lp import solve_lp
from .polytope import hull_vertices, image_oracle, refine, thin

DEFAULT_CAP = 512


@dataclass(frozen=True, eq=False)
class DistPolytope:
    """Convex hull of finitely many distributions on ``space``.

    ``gap`` is the last Hausdorff step of the iteration that produced the
    polytope, ``approximate`` flags vertex thinning and ``snapped`` lists the
    states whose Dirac replaced a vertex closer than the snapping radius.
    """

    space: object
    vertices: np.ndarray
    converged: bool = True
    gap: float = 0.0
    iterations: int = 0
    approximate: bool = False
    snapped: tuple = ()

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if V.shape[0] == 0 or V.shape[1] != self.space.n:
            raise InputError("a polytope needs at least one vertex on its space")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @classmethod
    def point(cls, space, i):
        return cls(space, np.eye(space.n)[space.index(i)][None, :])

    def __len__(self):
        return len(self.vertices)

    def distributions(self):
        return [Distribution(self.space, v) for v in self.vertices]

    def contains(self, p, tol=1e-9):
        p = p.weights if isinstance(p, Distribution) else np.asarray(p, dtype=float)
        return contains(self.vertices, p, tol)

    def support(self, c):
        """Maximum of ``p @ c`` over the polytope."""
        return float((self.vertices @ np.asarray(c, dtype=float)).max())


def _verts(space, P):
    if isinstance(P, DistPolytope):
        return P.vertices
    return np.atleast_2d(np.asarray(P, dtype=float))


def directed_hausdorff(space, A, B, tol=0.0):
    """``max_{a in A} d_KR(a, conv B)`` with the maximizing vertex index.

    A vertex whose KR distance to the nearest vertex of ``B`` is already at
    most ``tol`` is skipped, since the exact distance can only be smaller.
    """
    A, B = _verts(space, A), _verts(space, B)
    D = space.dist
    worst, arg = 0.0, None
    for i, a in enumerate(A):
        if np.abs(B - a).max(axis=1).min() <= 1e-15:
            continue
        diffs = a - B
        rough = min(_kr_upper(D, d) for d in diffs[np.argsort(np.abs(diffs).sum(axis=1))[:3]])
        if rough <= max(tol, worst):
            continue
        dist, _ = kr_to_polytope(space, a, B)
        if dist > worst:
            worst, arg = dist, i
    return worst, arg


def _kr_upper(D, diff):
    """Cost of the proportional transport plan, an upper bound on the KR distance."""
    pos, neg = np.clip(diff, 0, None), np.clip(-diff, 0, None)
    if pos.sum() <= 0 or neg.sum() <= 0:
        return 0.0
    return float(pos @ D @ neg / neg.sum())


def hausdorff(space, A, B, tol=0.0):
    """Hausdorff distance between two polytopes in the KR metric."""
    return max(directed_hausdorff(space, A, B, tol)[0], directed_hausdorff(space, B, A, tol)[0])


def _capped(V, cap):
    if cap is not None and len(V) > cap:
        return thin(V, cap), True
    return V, False


def linear_extension_image(house, P, tol=1e-12, cap=DEFAULT_CAP):
    """The polytope ``U_{p in P} sum_x p(x) Gamma(x)``."""
    space = house.space
    V = _verts(space, P)
    if V.shape[1] != house.n:
        raise InputError("polytope does not live on the house's state space")
    lists = [house.generators(x) for x in range(house.n)]
    W = refine(image_oracle(V, lists), house.n, tol, cap=cap)
    W, approx = _capped(W, cap)
    return DistPolytope(space, W, approximate=approx)


def _closure(house, x):
    """States reachable from ``x`` with positive probability in finitely many moves."""
    seen, todo = {x}, [x]
    while todo:
        y = todo.pop()
        for z in np.flatnonzero(house.generators(y).max(axis=0) > 0):
            if z not in seen:
                seen.add(int(z))
                todo.append(int(z))
    return sorted(seen)


def _snap(space, V, radius):
    """Replace vertices within ``radius`` (KR) of a Dirac by that Dirac."""
    if radius <= 0:
        return V, ()
    D = space.dist
    to_dirac = V @ D  # KR distance from each vertex to each Dirac
    hit = set()
    out = V.copy()
    for i in range(len(V)):
        z = int(np.argmin(to_dirac[i]))
        if 0 < to_dirac[i, z] <= radius:
            out[i] = np.eye(space.n)[z]
            hit.add(space.labels[z])
    if not hit:
        return V, ()
    return hull_vertices(out), tuple(sorted(hit))


def _occupation_oracle(house, x, states):
    """Support oracle of the stopped laws reachable from ``x``.

    A law ``s`` is reachable (up to closure) iff some occupation measure
    ``mu >= 0`` over (state, generator) pairs satisfies the flow balance
    ``s + sum mu(y, g) (delta_y - g) = delta_x``; each direction is one LP.
    The LP uses the outflows ``mu(y, g) (1 - g(y))`` as variables so that
    generators moving very little mass keep well-scaled columns.
    """
    n = house.n
    idx = {y: k for k, y in enumerate(states)}
    cols = []
    for y in states:
        for g in hull_vertices(house.generators(y)):
            off = g.copy()
            off[y] = 0.0
            if off.sum() <= 0:
                continue
            # variables are outflows from y, so each column is a unit move
            col = np.zeros(len(states))
            col[[idx[z] for z in states]] -= off[states] / off.sum()
            col[idx[y]] += 1.0
            cols.append(col)
    m = len(states)
    M = np.column_stack(cols) if cols else np.zeros((m, 0))
    A_eq = np.hstack([np.eye(m), M])
    b_eq = np.zeros(m)
    b_eq[idx[x]] = 1.0

    def oracle(D):
        vals = np.empty(len(D))
        pts = np.zeros((len(D), n))
        for i, d in enumerate(D):
            c = np.concatenate([-d[states], np.zeros(M.shape[1])])
            res = solve_lp(c, A_eq=A_eq, b_eq=b_eq)
            if not res.success:
                raise NumericalError(f"reachability LP failed: {res.status}")
            law = np.clip(res.x[:m], 0.0, None)
            pts[i, states] = law / law.sum()
            vals[i] = pts[i] @ d
        return vals, pts

    return oracle


def reachable_sets(house, states=None, tol=1e-6, max_iter=64, method="occupation",
                   cap=DEFAULT_CAP, snap=None, refine_tol=None):
    """Reachable sets ``Gamma^inf(x)`` for the given states (default all).

    ``occupation`` (default) recovers the exact closure as the projection of
    the flow-balance polyhedron of stopped laws; ``gap`` is then 0 and
    ``iterations`` counts refinement LPs.

    ``doubling`` iterates ``R_{2n}(x) = U_{p in R_n(x)} sum_y p(y) R_n(y)``
    simultaneously over all states reachable from the requested ones, and
    ``step`` iterates ``P_{n+1} = image(P_n)`` from each Dirac. Both stop once
    the Hausdorff step between successive polytopes is at most ``tol``. Being
    limited by double precision they only resolve features well above
    ``1e-12`` and serve as an independent cross-check on small houses.

    Finally vertices within ``snap`` (default ``tol``) of a Dirac are
    replaced by it, so Diracs that are only limit points show up exactly.
    """
    if not check_leavable(house):
        raise InputError("reachable sets need a leavable house (every Dirac available)")
    if method not in ("occupation", "doubling", "step"):
        raise InputError(f"unknown method {method!r}")
    space = house.space
    snap = tol if snap is None else snap
    targets = range(house.n) if states is None else [space.index(s) for s in states]
    results = {}

    if method == "occupation":
        rtol = min(1e-9, 0.01 * tol) if refine_tol is None else refine_tol
        for x in targets:
            calls = [0]
            base = _occupation_oracle(house, x, _closure(house, x))

            def counted(D, base=base, calls=calls):
                calls[0] += len(D)
                return base(D)

            V = refine(counted, house.n, rtol, cap=cap)
            V, approx = _capped(V, cap)
            results[x] = (V, 0.0, calls[0], approx)
    elif method == "doubling":
        rtol = 0.01 * tol if refine_tol is None else refine_tol
        todo = sorted({y for x in targets for y in _closure(house, x)})
        R = {y: hull_vertices(house.generators(y)) for y in todo}
        gap, it, approx = np.inf, 0, False
        while it < max_iter:
            it += 1
            new, gap = {}, 0.0
            for y in todo:
                W = refine(image_oracle(R[y], R), house.n, rtol, cap=cap)
                W, a = _capped(W, cap)
                approx |= a
                new[y] = W
                gap = max(gap, directed_hausdorff(space, W, R[y], tol)[0])
            R = new
            if gap <= tol:
                break
        results = {x: (R[x], gap, it, approx) for x in targets}
    else:
        rtol = 0.01 * tol if refine_tol is None else refine_tol
        lists = [hull_vertices(house.generators(y)) for y in range(house.n)]
        for x in targets:
            V = np.eye(house.n)[x][None, :]
            gap, it, approx = np.inf, 0, False
            while it < max_iter:
                it += 1
                W = refine(image_oracle(V, lists), house.n, rtol, cap=cap)
                W, a = _capped(W, cap)
                approx |= a
                gap = directed_hausdorff(space, W, V, tol)[0]
                V = W
                if gap <= tol:
                    break
            results[x] = (V, gap, it, approx)

    out = {}
    for x, (V, gap, it, approx) in results.items():
        V, hit = _snap(space, V, snap)
        out[space.labels[x]] = DistPolytope(space, V, converged=gap <= tol, gap=float(gap),
                                            iterations=it, approximate=approx, snapped=hit)
    return out


def reachable_set(house, x, tol=1e-6, max_iter=64, method="occupation", cap=DEFAULT_CAP,
                  snap=None):
    """Closure of ``U_n image^n(delta_x)``; see :func:`reachable_sets`."""
    label = house.space.labels[house.space.index(x)]
    return reachable_sets(house, [label], tol, max_iter, method, cap, snap)[label]


@dataclass(frozen=True, eq=False)
class Potential:
    """State potential with the normalized margin by which it certifies acyclicity."""

    values: np.ndarray
    margin: float = 0.0
    mode: str = "weak"
    details: dict = field(default_factory=dict)


def _phi(house, phi):
    vals = phi.values if isinstance(phi, Potential) else phi
    vals = np.asarray(vals, dtype=float).ravel()
    if vals.size != house.n:
        raise InputError(f"potential needs {house.n} values")
    return vals


def _margin_table(space, phi, candidates, tol):
    """Per-state smallest normalized drop ``(phi(x) - phi @ g) / d_KR(g, delta_x)``.

    Candidates within ``tol`` of the Dirac itself are ignored.
    """
    rows = {}
    for x, V in candidates.items():
        d = V @ space.dist[:, x]
        keep = d > tol
        if not keep.any():
            rows[x] = (np.inf, None)
            continue
        m = (phi[x] - V[keep] @ phi) / d[keep]
        k = int(np.argmin(m))
        rows[x] = (float(m[k]), V[keep][k])
    return rows


def _acyclic_check(house, phi, candidates, tol, mode):
    space = house.space
    phi = _phi(house, phi)
    for x, V in candidates.items():
        if not contains(V, np.eye(house.n)[x], tol):
            return CheckResult(False, np.inf, (space.labels[x], "dirac unavailable"),
                               {"mode": mode})
    rows = _margin_table(space, phi, candidates, tol)
    per_state = {space.labels[x]: m for x, (m, _) in rows.items()}
    x = min(rows, key=lambda s: rows[s][0])
    margin, g = rows[x]
    ok = margin > tol
    witness = None if ok else (space.labels[x], g)
    return CheckResult(ok, 0.0 if ok else float(tol - margin), witness,
                       {"margin": margin, "per_state": per_state, "mode": mode})


def check_weakly_acyclic(house, phi, tol=1e-9):
    """Is ``delta_x`` the unique maximizer of ``p @ phi`` over ``Gamma(x)`` for every x?

    Uniqueness is quantified by the normalized margin
    ``min (phi(x) - phi @ g) / d_KR(g, delta_x)`` over the generators, which
    must exceed ``tol``; ``details["margin"]`` reports it.
    """
    return _acyclic_check(house, phi, {x: house.generators(x) for x in range(house.n)},
                          tol, "weak")


def check_strongly_acyclic(house, phi, tol=1e-9, reach_tol=1e-6, sets=None):
    """Same test over the vertices of every reachable set."""
    sets = reachable_sets(house, tol=reach_tol) if sets is None else sets
    space = house.space
    for lab, P in sets.items():
        if not P.converged:
            raise NumericalError(f"reachable set of {lab} did not converge",
                                 residual=P.gap, details={"state": lab})
    cands = {space.index(lab): P.vertices for lab, P in sets.items()}
    return _acyclic_check(house, phi, cands, tol, "strong")


def potential_lp(house, mode="weak", tol=1e-9, reach_tol=1e-6, sets=None):
    """Best normalized margin and potential from the margin-maximizing LP.

    Variables are ``phi`` in ``[0, 1]`` and ``t >= 0``; for every state ``x``
    and relevant vertex ``g`` away from ``delta_x`` the constraint
    ``phi @ g - phi(x) + t * d_KR(g, delta_x) <= 0`` holds. Returns
    ``(phi, t, reason)``; ``reason`` explains a zero margin when the LP is
    not even posed.
    """
    n = house.n
    space = house.space
    if mode == "weak":
        cands = {x: house.generators(x) for x in range(n)}
        if not check_leavable(house, tol):
            return np.zeros(n), 0.0, "some state cannot stay put"
    elif mode == "strong":
        sets = reachable_sets(house, tol=reach_tol) if sets is None else sets
        cands = {space.index(lab): P.vertices for lab, P in sets.items()}
    else:
        raise InputError(f"unknown mode {mode!r}")
    rows = []
    for x, V in cands.items():
        d = V @ space.dist[:, x]
        for g, dg in zip(V[d > tol], d[d > tol]):
            r = np.append(g.copy(), dg)
            r[x] -= 1.0
            rows.append(r)
    bound = np.hstack([np.eye(n), np.zeros((n, 1))])
    cap_t = np.append(np.zeros(n), 1.0)[None, :]
    A_ub = np.vstack(rows + [bound, cap_t]) if rows else np.vstack([bound, cap_t])
    # t is bounded by 1 / (smallest distance) once any constraint is present
    t_max = 1.0 / space.dist[space.dist > 0].min() if n > 1 else 1.0
    b_ub = np.concatenate([np.zeros(len(rows)), np.ones(n), [t_max]])
    c = np.append(np.zeros(n), -1.0)
    res = solve_lp(c, A_ub, b_ub)
    if not res.success:
        raise NumericalError(f"potential LP failed: {res.status}")
    return res.x[:n], float(res.x[n]), None


def synthesize_potential(house, mode="weak", tol=1e-9, reach_tol=1e-6, sets=None):
    """Search for an acyclicity potential; returns a :class:`Potential` or ``None``.

    ``None`` means no potential was found at this discretization, which is not
    a proof that none exists.
    """
    phi, t, _ = potential_lp(house, mode, tol, reach_tol, sets)
    if t <= tol:
        return None
    return Potential(phi, t, mode)


def check_idempotent(house, tol=1e-9):
    """Does ``Gamma`` composed with its linear extension give back ``Gamma``?"""
    space = house.space
    worst, witness = 0.0, None
    for x in range(house.n):
        G = hull_vertices(house.generators(x))
        img = linear_extension_image(house, G, cap=None).vertices
        d = hausdorff(space, G, img, tol)
        if d > worst:
            worst, witness = d, space.labels[x]
    ok = worst <= tol
    return CheckResult(ok, worst, None if ok else witness, {"hausdorff": worst})
