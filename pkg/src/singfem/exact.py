"""Closed-form solutions of -Delta u = gamma with zero boundary data.

Three cases: unit point mass at the origin of the unit disk and of the unit
ball, and the uniform line measure on the segment {x=y=0, |z|<=1} inside the
ellipsoid x^2/3 + y^2/3 + z^2/4 <= 1 (the segment's confocal ellipsoid, so
the line potential is constant on the boundary). Analytic gradients are
provided alongside for energy-norm errors.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularEvaluationError
from .geometry import _as_points

_FOUR_PI = 4.0 * np.pi


def exact_point_2d(x):
    """u(x) = -log|x| / (2 pi) on the unit disk."""
    pts, single = _as_points(x, 2)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("exact_point_2d evaluated at the origin")
    u = -np.log(r) / (2.0 * np.pi)
    return float(u[0]) if single else u


def exact_point_2d_grad(x):
    pts, single = _as_points(x, 2)
    r2 = np.sum(pts * pts, axis=1)
    if np.any(r2 == 0.0):
        raise SingularEvaluationError("exact_point_2d_grad evaluated at the origin")
    g = -pts / (2.0 * np.pi * r2[:, None])
    return g[0] if single else g


def exact_point_3d(x):
    """u(x) = (1/(4 pi)) (1/|x| - 1) on the unit ball."""
    pts, single = _as_points(x, 3)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("exact_point_3d evaluated at the origin")
    u = (1.0 / r - 1.0) / _FOUR_PI
    return float(u[0]) if single else u


def exact_point_3d_grad(x):
    pts, single = _as_points(x, 3)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r == 0.0):
        raise SingularEvaluationError("exact_point_3d_grad evaluated at the origin")
    g = -pts / (_FOUR_PI * r[:, None] ** 3)
    return g[0] if single else g


def _segment_parts(pts):
    """rho^2, r_a (distance to (0,0,1)), r_b (distance to (0,0,-1)), z."""
    rho2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    z = pts[:, 2]
    ra = np.sqrt(rho2 + (z - 1.0) ** 2)
    rb = np.sqrt(rho2 + (z + 1.0) ** 2)
    on_segment = (rho2 == 0.0) & (np.abs(z) <= 1.0)
    if np.any(on_segment):
        raise SingularEvaluationError("exact_segment_3d evaluated on the segment")
    return rho2, ra, rb, z


def exact_segment_3d(x):
    """Line potential of the unit-density segment, zero on the ellipsoid.

    u = (1/(4 pi)) log[(r_a + 1 - z) / (3 (r_b - 1 - z))], rewritten so the
    log argument never suffers catastrophic cancellation near the axis:
    below the top endpoint, r_b - 1 - z = rho^2 / (r_b + 1 + z); above it,
    r_a + 1 - z = rho^2 / (r_a + z - 1).
    """
    pts, single = _as_points(x, 3)
    rho2, ra, rb, z = _segment_parts(pts)
    log_arg = np.empty(len(pts))
    hi = z > 1.0
    lo = z < -1.0
    mid = ~hi & ~lo
    with np.errstate(divide="ignore"):
        log_arg[mid] = (
            np.log((ra[mid] + 1.0 - z[mid]) * (rb[mid] + 1.0 + z[mid])) - np.log(rho2[mid])
        )
        log_arg[hi] = np.log(rb[hi] + 1.0 + z[hi]) - np.log(ra[hi] + z[hi] - 1.0)
        log_arg[lo] = np.log(ra[lo] + 1.0 - z[lo]) - np.log(rb[lo] - 1.0 - z[lo])
    u = (log_arg - np.log(3.0)) / _FOUR_PI
    return float(u[0]) if single else u


def exact_segment_3d_grad(x):
    """Analytic gradient of exact_segment_3d.

    The axial component collapses to (1/r_b - 1/r_a)/(4 pi); the transverse
    component is singular like -2/rho on the open segment.
    """
    pts, single = _as_points(x, 3)
    rho2, ra, rb, z = _segment_parts(pts)
    gz = (1.0 / rb - 1.0 / ra) / _FOUR_PI
    # d/drho of the potential, times (x, y)/rho
    grho_over_rho = np.zeros(len(pts))
    pos = rho2 > 0.0
    mid = pos & (np.abs(z) <= 1.0)
    hi = pos & (z > 1.0)
    lo = pos & (z < -1.0)
    grho_over_rho[mid] = (
        1.0 / (ra[mid] * (ra[mid] + 1.0 - z[mid]))
        + 1.0 / (rb[mid] * (rb[mid] + 1.0 + z[mid]))
        - 2.0 / rho2[mid]
    ) / _FOUR_PI
    # beyond an endpoint the -2/rho^2 term cancels badly against the
    # nearer-endpoint term; the difference collapses to a stable form
    grho_over_rho[hi] = (
        1.0 / (rb[hi] * (rb[hi] + 1.0 + z[hi])) - 1.0 / (ra[hi] * (ra[hi] + z[hi] - 1.0))
    ) / _FOUR_PI
    grho_over_rho[lo] = (
        1.0 / (ra[lo] * (ra[lo] + 1.0 - z[lo])) - 1.0 / (rb[lo] * (rb[lo] - 1.0 - z[lo]))
    ) / _FOUR_PI
    g = np.column_stack([pts[:, 0] * grho_over_rho, pts[:, 1] * grho_over_rho, gz])
    return g[0] if single else g


def segment_potential_line_integral(x, npts=20000):
    """Brute-force oracle: composite midpoint rule for the line potential."""
    pts, single = _as_points(x, 3)
    t = (np.arange(npts) + 0.5) / npts * 2.0 - 1.0
    dx = pts[:, 0][:, None]
    dy = pts[:, 1][:, None]
    dz = pts[:, 2][:, None] - t[None, :]
    d = np.sqrt(dx * dx + dy * dy + dz * dz)
    u = np.sum(1.0 / d, axis=1) * (2.0 / npts) / _FOUR_PI
    return float(u[0]) if single else u


def exact_for_problem(problem, density_scale=1.0):
    """(u, grad_u) pair for a named experiment, scaled for segment density.

    The segment potential corresponds to unit line density; a constant
    density c scales solution and gradient by c.
    """
    if problem == "point2d":
        return exact_point_2d, exact_point_2d_grad
    if problem == "point3d":
        return exact_point_3d, exact_point_3d_grad
    if problem == "segment3d":
        c = float(density_scale)
        if c == 1.0:
            return exact_segment_3d, exact_segment_3d_grad
        return (
            lambda x: c * np.asarray(exact_segment_3d(x)),
            lambda x: c * np.asarray(exact_segment_3d_grad(x)),
        )
    raise ValueError(f"no closed-form solution for problem {problem!r}")
