"""Weighted-norm error evaluation, the truncated interpolant diagnostic and
convergence-order estimation.

Weighted norms are ||v r^beta||_L2 and ||grad(v) r^sigma||_L2 with r the
distance to the singular set. Elements intersecting the singular set are
integrated with recursive longest-edge bisection before the base simplex
rule; the rule's nodes are strictly interior, so r > 0 at every node.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import _locate_point, _segment_intervals
from .errors import QuadratureError, SingularEvaluationError
from .geometry import PointDelta, SegmentMeasure, dist_to_source
from .mesh import Mesh
from .quadrature import simplex_rule, subdivide_simplex


@dataclass
class WeightedNormSpec:
    """Which norm to measure: L2 with weight r^exponent, or the H1 seminorm
    with weight r^exponent."""

    kind: str  # L2_weighted | H1semi_weighted
    exponent: float
    source: object  # PointDelta | SegmentMeasure
    quad_order: int = 3
    subdivision_depth: int = 3

    def __post_init__(self):
        if self.kind not in ("L2_weighted", "H1semi_weighted"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        n = self.source.dim
        m = 1 if isinstance(self.source, SegmentMeasure) else 0
        if self.exponent <= -(n - m) / 2.0:
            raise ValueError(
                f"exponent {self.exponent} not integrable: need > {-(n - m) / 2.0}"
            )


def elements_touching_source(mesh: Mesh, src):
    """Boolean mask of elements whose closure intersects the singular set."""
    touch = np.zeros(mesh.num_elements, dtype=bool)
    if isinstance(src, PointDelta):
        try:
            t, _ = _locate_point(mesh, src.location)
        except Exception:
            return touch
        # every element containing the point (it may sit on a shared facet)
        r_vertex = dist_to_source(mesh.vertices, src)
        touch = r_vertex[mesh.elements].min(axis=1) <= 1e-12
        touch[t] = True
    elif isinstance(src, SegmentMeasure):
        idx, _ = _segment_intervals(mesh, src)
        touch[idx] = True
        r_vertex = dist_to_source(mesh.vertices, src)
        touch |= r_vertex[mesh.elements].min(axis=1) <= 1e-12
    else:
        raise ValueError(f"unknown source type {type(src).__name__}")
    return touch


def _element_p1(mesh: Mesh, u_h):
    """Per-element P1 data: vertex values and the constant gradient."""
    coords = mesh.element_coords()
    edges = coords[:, 1:, :] - coords[:, :1, :]
    vals = u_h[mesh.elements]
    dvals = vals[:, 1:] - vals[:, :1]
    grads = np.linalg.solve(edges, dvals[:, :, None])[:, :, 0]
    return coords, vals, grads


def _quad_block(coords, bary, w, vols):
    """Physical nodes (M, Q, dim) and combined weights (M, Q)."""
    nodes = np.einsum("qi,tid->tqd", bary, coords)
    weights = vols[:, None] * w[None, :]
    return nodes, weights


def weighted_error(mesh: Mesh, u_h, exact, spec: WeightedNormSpec, exact_grad=None):
    """Weighted error norm of exact - u_h over the mesh.

    ``exact`` maps point batches to values; ``exact_grad`` (required for the
    H1 seminorm) maps point batches to gradients. A singular evaluation is
    retried with one extra level of subdivision before giving up.
    """
    u_h = np.asarray(u_h, dtype=float)
    if u_h.shape != (mesh.num_vertices,):
        raise ValueError("u_h must carry one coefficient per vertex")
    want_grad = spec.kind == "H1semi_weighted"
    if want_grad and exact_grad is None:
        raise ValueError("H1semi_weighted requires exact_grad")
    src = spec.source
    bary, w = simplex_rule(mesh.dim, spec.quad_order)
    coords, vals, grads = _element_p1(mesh, u_h)
    vols = mesh.signed_volumes()
    touch = elements_touching_source(mesh, src)

    total = 0.0
    far = ~touch
    if np.any(far):
        nodes, weights = _quad_block(coords[far], bary, w, vols[far])
        flat = nodes.reshape(-1, mesh.dim)
        r = dist_to_source(flat, src)
        if want_grad:
            diff = np.asarray(exact_grad(flat)) - np.repeat(grads[far], len(w), axis=0)
            val2 = np.sum(diff * diff, axis=1)
        else:
            uh_at = (vals[far] @ bary.T).ravel()
            d = np.asarray(exact(flat)) - uh_at
            val2 = d * d
        total += float(np.sum(weights.ravel() * r ** (2.0 * spec.exponent) * val2))

    for t in np.nonzero(touch)[0]:
        total += _singular_element_error(
            coords[t], vals[t], grads[t], exact, exact_grad, spec, bary, w, want_grad
        )
    return float(np.sqrt(total))


def _singular_element_error(verts, vvals, vgrad, exact, exact_grad, spec, bary, w, want_grad):
    from .quadrature import simplex_volume

    src = spec.source
    depth = spec.subdivision_depth
    for attempt in range(2):
        try:
            parts = subdivide_simplex(verts, depth + attempt)
            acc = 0.0
            # barycentric coordinates w.r.t. the parent element, for P1 eval
            edges = (verts[1:] - verts[0]).T
            for p in parts:
                vol = abs(simplex_volume(p))
                nodes = bary @ p
                r = dist_to_source(nodes, src)
                if np.any(r == 0.0):
                    raise SingularEvaluationError("quadrature node on the singular set")
                if want_grad:
                    diff = np.asarray(exact_grad(nodes)) - vgrad[None, :]
                    val2 = np.sum(diff * diff, axis=1)
                else:
                    lam_rest = np.linalg.solve(edges, (nodes - verts[0]).T).T
                    lam = np.column_stack([1.0 - lam_rest.sum(axis=1), lam_rest])
                    d = np.asarray(exact(nodes)) - lam @ vvals
                    val2 = d * d
                acc += float(np.sum(w * vol * r ** (2.0 * spec.exponent) * val2))
            return acc
        except SingularEvaluationError:
            if attempt == 1:
                raise QuadratureError(
                    "could not avoid a singular evaluation on a source-touching element"
                )
    raise AssertionError("unreachable")


def truncated_interpolant(mesh: Mesh, exact, src):
    """Nodal interpolant with coefficients zeroed near the singular set.

    A vertex is zeroed when it belongs to an element whose vertex patch
    touches the set; elsewhere the coefficient is the exact nodal value.
    """
    touch = elements_touching_source(mesh, src)
    near_vertices = np.zeros(mesh.num_vertices, dtype=bool)
    near_vertices[np.unique(mesh.elements[touch])] = True
    patch_touch = near_vertices[mesh.elements].any(axis=1)
    zeroed = np.zeros(mesh.num_vertices, dtype=bool)
    zeroed[np.unique(mesh.elements[patch_touch])] = True
    coeffs = np.zeros(mesh.num_vertices)
    far = ~zeroed
    if np.any(far):
        coeffs[far] = np.asarray(exact(mesh.vertices[far]))
    return coeffs


@dataclass
class StudyRecord:
    """One study level: mesh size data and measured errors per norm name."""

    h: float
    num_vertices: int
    num_elements: int
    errors: dict
    seconds: float = 0.0

    def __post_init__(self):
        for name, val in self.errors.items():
            if not np.isfinite(val) or val < 0.0:
                raise ValueError(f"error {name!r} must be nonnegative and finite")


@dataclass
class EocOrders:
    """Estimated order for one norm.

    ``eoc_h``/``eoc_N`` follow the published convention (order between the
    two finest levels); the least-squares slope over all levels and its
    residual are reported alongside.
    """

    eoc_h: float
    eoc_N: float
    ls_eoc_h: float
    ls_eoc_N: float
    ls_residual_h: float
    ls_residual_N: float


@dataclass
class EocReport:
    orders: dict = field(default_factory=dict)  # norm name -> EocOrders

    def __getitem__(self, name):
        return self.orders[name]


def estimate_eoc(records, dim):
    """Convergence orders per norm from a list of StudyRecord.

    eoc_h is measured against the mesh parameter, eoc_N against the vertex
    count (scaled by the space dimension).
    """
    if len(records) < 2:
        raise ValueError("need at least 2 records to estimate an order")
    h = np.array([rec.h for rec in records])
    N = np.array([rec.num_vertices for rec in records], dtype=float)
    if np.any(np.diff(h) >= 0.0):
        raise ValueError("records must have strictly decreasing h")
    report = EocReport()
    for name in records[0].errors:
        err = np.array([rec.errors[name] for rec in records])
        if np.any(err <= 0.0) or not np.all(np.isfinite(err)):
            raise ValueError(f"invalid error values for norm {name!r}")
        loge = np.log(err)
        eoc_h = (loge[-2] - loge[-1]) / (np.log(h[-2]) - np.log(h[-1]))
        eoc_N = dim * (loge[-2] - loge[-1]) / (np.log(N[-1]) - np.log(N[-2]))
        ch = np.polyfit(-np.log(h), -loge, 1)
        cN = np.polyfit(np.log(N), -loge, 1)
        res_h = float(np.sqrt(np.mean((np.polyval(ch, -np.log(h)) + loge) ** 2)))
        res_N = float(np.sqrt(np.mean((np.polyval(cN, np.log(N)) + loge) ** 2)))
        report.orders[name] = EocOrders(
            float(eoc_h), float(eoc_N), float(ch[0]), float(dim * cN[0]), res_h, res_N
        )
    return report
