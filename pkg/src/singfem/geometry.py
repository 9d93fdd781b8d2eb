"""Singular sources, analytic domains and distance functions.

Everything here is exact (closed form), so mesh grading audits are not
polluted by geometric error. All functions accept either a single point of
shape ``(dim,)`` or a batch of points of shape ``(npts, dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


def _as_points(x, dim=None):
    """Return (points, was_single) with points of shape (npts, dim)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
        single = True
    elif pts.ndim == 2:
        single = False
    else:
        raise ValueError(f"expected point array of ndim 1 or 2, got {pts.ndim}")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"dimension mismatch: points have dim {pts.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts, single


@dataclass(frozen=True)
class PointDelta:
    """Unit point mass at ``location``."""

    location: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.location, dtype=float)
        if loc.ndim != 1 or loc.shape[0] not in (2, 3):
            raise ValueError("point delta location must be a 2D or 3D point")
        object.__setattr__(self, "location", loc)

    @property
    def dim(self):
        return self.location.shape[0]


@dataclass(frozen=True)
class SegmentMeasure:
    """Line measure on the segment [a, b] with density per arclength.

    ``density`` maps arclength t in [0, |b-a|] to a line density. The default
    is the constant 1/2 used throughout the experiments.
    """

    a: np.ndarray
    b: np.ndarray
    density: Callable[[np.ndarray], np.ndarray] = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.shape[0] not in (2, 3):
            raise ValueError("segment endpoints must be 2D or 3D points of equal dim")
        if np.linalg.norm(b - a) == 0.0:
            raise ValueError("segment endpoints must be distinct")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if self.density is None:
            object.__setattr__(self, "density", lambda t: np.full_like(np.asarray(t, float), 0.5))

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def length(self):
        return float(np.linalg.norm(self.b - self.a))

    @property
    def direction(self):
        d = self.b - self.a
        return d / np.linalg.norm(d)


def dist_to_source(x, src):
    """Distance r(x) to the singular set (point, or closed segment [a, b])."""
    if isinstance(src, PointDelta):
        pts, single = _as_points(x, src.dim)
        r = np.linalg.norm(pts - src.location, axis=1)
    elif isinstance(src, SegmentMeasure):
        pts, single = _as_points(x, src.dim)
        ab = src.b - src.a
        # clamped parametric projection avoids branch errors at the endpoints
        t = np.clip((pts - src.a) @ ab / (ab @ ab), 0.0, 1.0)
        foot = src.a[None, :] + t[:, None] * ab[None, :]
        r = np.linalg.norm(pts - foot, axis=1)
    else:
        raise ValueError(f"unknown source type {type(src).__name__}")
    return float(r[0]) if single else r


def dist_to_endpoints(x, src):
    """Distance r_e(x) to the nearer of the segment endpoints."""
    if not isinstance(src, SegmentMeasure):
        raise ValueError("dist_to_endpoints requires a SegmentMeasure source")
    pts, single = _as_points(x, src.dim)
    da = np.linalg.norm(pts - src.a, axis=1)
    db = np.linalg.norm(pts - src.b, axis=1)
    r = np.minimum(da, db)
    return float(r[0]) if single else r


class Domain:
    """Base class: an inside predicate plus a boundary projection."""

    dim: int

    def contains(self, x):
        raise NotImplementedError

    def boundary_project(self, x):
        raise NotImplementedError

    def boundary_residual(self, x):
        """Signed residual of the boundary equation, zero on the boundary."""
        raise NotImplementedError

    @property
    def diameter(self):
        raise NotImplementedError


class _RadialDomain(Domain):
    """Domains star-shaped about the origin with |A^{-1} x| = 1 as boundary."""

    semi_axes: np.ndarray

    def _q(self, pts):
        return np.linalg.norm(pts / self.semi_axes, axis=1)

    def contains(self, x):
        pts, single = _as_points(x, self.dim)
        inside = self._q(pts) <= 1.0 + 1e-12
        return bool(inside[0]) if single else inside

    def boundary_project(self, x):
        pts, single = _as_points(x, self.dim)
        q = self._q(pts)
        if np.any(q == 0.0):
            raise ValueError("cannot project the center: no preferred direction")
        proj = pts / q[:, None]
        return proj[0] if single else proj

    def boundary_residual(self, x):
        pts, single = _as_points(x, self.dim)
        res = self._q(pts) - 1.0
        return float(res[0]) if single else res

    @property
    def diameter(self):
        return 2.0 * float(np.max(self.semi_axes))


class UnitDisk(_RadialDomain):
    dim = 2

    def __init__(self):
        self.semi_axes = np.ones(2)


class UnitBall(_RadialDomain):
    dim = 3

    def __init__(self):
        self.semi_axes = np.ones(3)


class Ellipsoid(_RadialDomain):
    """The solid x^2/3 + y^2/3 + z^2/4 <= 1 used for the segment experiments."""

    dim = 3

    def __init__(self):
        self.semi_axes = np.array([np.sqrt(3.0), np.sqrt(3.0), 2.0])


class CustomDomain(Domain):
    """Domain given by an inside predicate and a boundary projection."""

    def __init__(self, dim, inside, project, residual, diameter):
        self.dim = dim
        self._inside = inside
        self._project = project
        self._residual = residual
        self._diameter = float(diameter)

    def contains(self, x):
        pts, single = _as_points(x, self.dim)
        inside = np.asarray(self._inside(pts), dtype=bool)
        return bool(inside[0]) if single else inside

    def boundary_project(self, x):
        pts, single = _as_points(x, self.dim)
        proj = np.asarray(self._project(pts), dtype=float)
        return proj[0] if single else proj

    def boundary_residual(self, x):
        pts, single = _as_points(x, self.dim)
        res = np.asarray(self._residual(pts), dtype=float)
        return float(res[0]) if single else res

    @property
    def diameter(self):
        return self._diameter


def stadium_domain(src: SegmentMeasure, radius=1.0):
    """The set {r(x) < radius} around a segment (2D capsule / 3D stadium)."""

    def inside(pts):
        return dist_to_source(pts, src) <= radius * (1.0 + 1e-12)

    def residual(pts):
        return dist_to_source(pts, src) / radius - 1.0

    def project(pts):
        r = dist_to_source(pts, src)
        if np.any(r == 0.0):
            raise ValueError("cannot project a point on the segment itself")
        ab = src.b - src.a
        t = np.clip((pts - src.a) @ ab / (ab @ ab), 0.0, 1.0)
        foot = src.a[None, :] + t[:, None] * ab[None, :]
        return foot + (pts - foot) * (radius / r)[:, None]

    diameter = src.length + 2.0 * radius
    return CustomDomain(src.dim, inside, project, residual, diameter)


def source_for_problem(problem: str):
    """Canonical source for each named experiment."""
    if problem == "point2d":
        return PointDelta(np.zeros(2))
    if problem == "point3d":
        return PointDelta(np.zeros(3))
    if problem == "segment3d":
        return SegmentMeasure(np.array([0.0, 0.0, -1.0]), np.array([0.0, 0.0, 1.0]))
    if problem == "segment2d":
        return SegmentMeasure(np.array([0.0, -0.5]), np.array([0.0, 0.5]))
    raise ValueError(f"unknown problem {problem!r}")


def domain_for_problem(problem: str):
    if problem == "point2d":
        return UnitDisk()
    if problem == "point3d":
        return UnitBall()
    if problem == "segment3d":
        return Ellipsoid()
    if problem == "segment2d":
        return stadium_domain(source_for_problem("segment2d"), radius=1.0)
    raise ValueError(f"unknown problem {problem!r}")
