"""Polytopes of distributions described by vertex lists.

Hulls are computed with Qhull inside the affine hull of the points; images
of polytopes under a linearly extended house are recovered from their support
function by facet refinement.
"""

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ResourceLimitError
from .lp import find_convex_weights


def dedupe(points, tol=1e-13):
    """Drop points within ``tol`` (sup norm) of an earlier point."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(P) <= 1:
        return P
    keys = np.round(P / tol).astype(np.int64) if tol > 0 else P
    _, idx = np.unique(keys, axis=0, return_index=True)
    return P[np.sort(idx)]


def affine_frame(points, tol=1e-10):
    """Centroid and orthonormal row basis of the affine hull of the points."""
    P = np.atleast_2d(points)
    c = P.mean(axis=0)
    if len(P) == 1:
        return c, np.zeros((0, P.shape[1]))
    _, s, vt = np.linalg.svd(P - c, full_matrices=False)
    k = int((s > tol * max(1.0, s[0] if s.size else 0.0)).sum())
    return c, vt[:k]


def _lp_vertices(P, tol):
    """Keep the points that are not convex combinations of the others."""
    keep = []
    for i in range(len(P)):
        others = np.delete(P, i, axis=0)
        if len(others) == 0:
            keep.append(i)
            continue
        _, err = find_convex_weights(others, P[i], tol)
        if err > tol:
            keep.append(i)
    return P[keep]


def hull_vertices(points, tol=1e-12):
    """Vertices of the convex hull of the rows of ``points``."""
    P = dedupe(points)
    if len(P) <= 2:
        if len(P) == 2 and np.abs(P[0] - P[1]).max() <= tol:
            return P[:1]
        return P
    c, B = affine_frame(P)
    k = B.shape[0]
    if k == 0:
        return P[:1]
    Y = (P - c) @ B.T
    if k == 1:
        return P[[int(np.argmin(Y[:, 0])), int(np.argmax(Y[:, 0]))]]
    if len(P) <= k + 1:
        return P
    try:
        hull = ConvexHull(Y)
        return P[np.sort(hull.vertices)]
    except (QhullError, ValueError):
        return _lp_vertices(P, tol)


def _complement(B, n):
    """Orthonormal basis of sum-zero directions orthogonal to the rows of ``B``."""
    ones = np.ones((1, n)) / np.sqrt(n)
    M = np.vstack([ones, B]) if B.size else ones
    q, _ = np.linalg.qr(M.T, mode="complete")
    return q[:, M.shape[0]:].T


def refine(oracle, n, tol=1e-12, seeds=None, cap=512, max_rounds=10_000):
    """Vertices of a polytope of distributions known only through its support function.

    ``oracle(D)`` receives directions as rows of ``D`` and returns
    ``(values, points)`` with ``values[i] = max_{p in P} p @ D[i]`` attained at
    ``points[i]``. Starting from the points supporting the coordinate
    directions, facets of the current hull are probed until none can be
    pushed outward by more than ``tol``.
    """
    eye = np.eye(n)
    D = np.vstack([eye, -eye] if seeds is None else [eye, -eye, seeds])
    _, pts = oracle(D)
    V = hull_vertices(pts)
    for _ in range(max_rounds):
        if cap is not None and len(V) > 8 * cap:
            raise ResourceLimitError(
                f"polytope exceeds {8 * cap} vertices; use coarser generators")
        c, B = affine_frame(V)
        k = B.shape[0]
        C = _complement(B, n)
        if len(C):
            dirs = np.vstack([C, -C])
            vals, new = oracle(dirs)
            cur = dirs @ c
            out = vals > cur + tol
            if out.any():
                V = hull_vertices(np.vstack([V, new[out]]))
                continue
        if k == 0:
            return V
        if k == 1:
            dirs = np.vstack([B, -B])
        else:
            Y = (V - c) @ B.T
            try:
                hull = ConvexHull(Y)
                normals = hull.equations[:, :-1]
            except (QhullError, ValueError):
                normals = np.vstack([np.eye(k), -np.eye(k)])
            normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
            dirs = dedupe(normals @ B, 1e-12)
        vals, new = oracle(dirs)
        cur = (V @ dirs.T).max(axis=0)
        out = vals > cur + tol
        if not out.any():
            return V
        V = hull_vertices(np.vstack([V, new[out]]))
    raise ResourceLimitError("facet refinement did not settle")


def thin(V, cap):
    """Farthest-point subsample of at most ``cap`` rows (first row kept)."""
    if len(V) <= cap:
        return V
    chosen = [0]
    d = np.abs(V - V[0]).sum(axis=1)
    for _ in range(cap - 1):
        i = int(np.argmax(d))
        chosen.append(i)
        d = np.minimum(d, np.abs(V - V[i]).sum(axis=1))
    return V[np.sort(chosen)]


def minkowski_support(vertex_lists, D):
    """Per-state support values and maximizers for each direction in ``D``.

    Returns ``(S, A)`` where ``S[x, i]`` is the support of polytope ``x`` in
    direction ``D[i]`` and ``A[x, i]`` the index of a maximizing vertex.
    """
    S = np.empty((len(vertex_lists), len(D)))
    A = np.empty((len(vertex_lists), len(D)), dtype=int)
    for x, V in enumerate(vertex_lists):
        vals = V @ D.T
        A[x] = vals.argmax(axis=0)
        S[x] = vals[A[x], np.arange(len(D))]
    return S, A


def image_oracle(P, vertex_lists):
    """Support oracle of ``U_{p in P} sum_x p(x) Q_x`` for vertex lists ``Q_x``."""
    P = np.atleast_2d(P)
    support = np.flatnonzero(P.max(axis=0) > 0)

    def oracle(D):
        S, A = minkowski_support([vertex_lists[x] for x in support], D)
        tot = P[:, support] @ S
        best = tot.argmax(axis=0)
        vals = tot[best, np.arange(len(D))]
        pts = np.zeros((len(D), P.shape[1]))
        for j, x in enumerate(support):
            pts += P[best, x][:, None] * vertex_lists[x][A[j]]
        return vals, pts

    return oracle
