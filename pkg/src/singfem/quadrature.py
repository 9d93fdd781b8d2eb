"""Simplex quadrature with strictly interior nodes, plus 1D Gauss rules.

The volume rules are the symmetric degree-3 rules (4 points on triangles,
5 points on tetrahedra). All their nodes are interior, so integrands that
blow up on element faces or edges are never evaluated at a singular point.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

# barycentric coordinates and weights (weights sum to 1, scale by |T|)
_TRI_DEG3_BARY = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [0.6, 0.2, 0.2],
        [0.2, 0.6, 0.2],
        [0.2, 0.2, 0.6],
    ]
)
_TRI_DEG3_W = np.array([-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0])

_TET_DEG3_BARY = np.array(
    [
        [0.25, 0.25, 0.25, 0.25],
        [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 0.5, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 0.5, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5],
    ]
)
_TET_DEG3_W = np.array([-0.8, 0.45, 0.45, 0.45, 0.45])


def simplex_rule(dim, order=3):
    """Barycentric nodes and weights for a simplex of dimension ``dim``.

    Weights sum to 1; multiply by the simplex volume. Only the interior
    degree-3 rules are provided (they are also exact for lower degrees).
    """
    if order > 3:
        raise ValueError(f"only rules up to degree 3 are provided, got {order}")
    if dim == 2:
        return _TRI_DEG3_BARY.copy(), _TRI_DEG3_W.copy()
    if dim == 3:
        return _TET_DEG3_BARY.copy(), _TET_DEG3_W.copy()
    raise ValueError(f"unsupported simplex dimension {dim}")


def gauss_1d(order):
    """Nodes/weights on [0, 1] exact for polynomials of degree ``order``."""
    npts = max(1, (order + 2) // 2)
    x, w = leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def simplex_volume(verts):
    """Signed volume of a simplex given as (dim+1, dim) vertex array."""
    v = np.asarray(verts, dtype=float)
    d = v.shape[1]
    mat = v[1:] - v[0]
    from math import factorial

    return float(np.linalg.det(mat)) / factorial(d)


def bisect_simplex(verts):
    """Split a simplex in two across the midpoint of its longest edge."""
    v = np.asarray(verts, dtype=float)
    n = v.shape[0]
    best, bi, bj = -1.0, 0, 1
    for i in range(n):
        for j in range(i + 1, n):
            d2 = float(np.sum((v[i] - v[j]) ** 2))
            if d2 > best:
                best, bi, bj = d2, i, j
    mid = 0.5 * (v[bi] + v[bj])
    a = v.copy()
    a[bj] = mid
    b = v.copy()
    b[bi] = mid
    return a, b


def subdivide_simplex(verts, depth):
    """Recursive longest-edge bisection: 2**depth sub-simplices."""
    parts = [np.asarray(verts, dtype=float)]
    for _ in range(depth):
        nxt = []
        for p in parts:
            a, b = bisect_simplex(p)
            nxt.append(a)
            nxt.append(b)
        parts = nxt
    return parts
