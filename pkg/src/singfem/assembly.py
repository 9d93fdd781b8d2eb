"""P1 Galerkin assembly: stiffness matrix, measure-valued load vectors and
homogeneous Dirichlet elimination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import (
    AssemblyError,
    ClippingError,
    EmptySystemError,
    PointLocationError,
)
from .geometry import SegmentMeasure, _as_points
from .mesh import Mesh
from .quadrature import gauss_1d


def _barycentric_gradients(mesh: Mesh):
    """(M, dim+1, dim) gradients of the barycentric coordinates, plus volumes."""
    coords = mesh.element_coords()
    edges = coords[:, 1:, :] - coords[:, :1, :]
    vols = mesh.signed_volumes()
    diam = mesh.diameters()
    if np.any(np.abs(vols) <= 1e-14 * diam**mesh.dim):
        bad = int(np.argmin(np.abs(vols) / diam**mesh.dim))
        raise AssemblyError(f"degenerate element {bad} (volume below tolerance)")
    # rows of ``edges`` are the edge vectors, so the barycentric gradients
    # are the columns of its inverse
    inv = np.linalg.inv(edges)
    grads = np.empty((mesh.num_elements, mesh.dim + 1, mesh.dim))
    grads[:, 1:, :] = np.transpose(inv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return grads, vols


def assemble_stiffness(mesh: Mesh):
    """Full stiffness matrix over all vertices: A_ij = sum_T |T| grad_i . grad_j.

    Constants are in the kernel (zero row sums) until boundary elimination.
    """
    grads, vols = _barycentric_gradients(mesh)
    local = np.einsum("tid,tjd,t->tij", grads, grads, vols)
    nloc = mesh.dim + 1
    rows = np.repeat(mesh.elements, nloc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nloc)).ravel()
    A = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.num_vertices, mesh.num_vertices)
    ).tocsr()
    A.sum_duplicates()
    return A


def _locate_point(mesh: Mesh, x0, tol=1e-12):
    """Element index and barycentric coordinates of x0; lowest index wins ties."""
    coords = mesh.element_coords()
    lo = coords.min(axis=1) - tol
    hi = coords.max(axis=1) + tol
    cand = np.nonzero(np.all((x0 >= lo) & (x0 <= hi), axis=1))[0]
    if len(cand):
        edges = coords[cand, 1:, :] - coords[cand, :1, :]
        rhs = x0[None, :] - coords[cand, 0, :]
        lam_rest = np.linalg.solve(np.transpose(edges, (0, 2, 1)), rhs[:, :, None])[:, :, 0]
        lam0 = 1.0 - lam_rest.sum(axis=1)
        lam = np.column_stack([lam0, lam_rest])
        inside = np.all(lam >= -1e-10, axis=1)
        hits = np.nonzero(inside)[0]
        if len(hits):
            k = hits[0]  # cand is sorted, so this is the lowest element index
            return int(cand[k]), np.clip(lam[k], 0.0, None)
    raise PointLocationError(f"point {x0} not inside any element")


def assemble_rhs_point(mesh: Mesh, x0):
    """Load vector b_i = phi_i(x0): the barycentric coordinates of x0."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (mesh.dim,):
        raise ValueError(f"point must have dim {mesh.dim}")
    t, lam = _locate_point(mesh, x0)
    b = np.zeros(mesh.num_vertices)
    b[mesh.elements[t]] = lam / lam.sum()
    return b


def _segment_intervals(mesh: Mesh, src: SegmentMeasure):
    """Per-element parameter intervals [t0, t1] where the segment is inside."""
    coords = mesh.element_coords()
    a, b = src.a, src.b
    pad = 1e-12 * max(1.0, src.length)
    lo = coords.min(axis=1)
    hi = coords.max(axis=1)
    seg_lo = np.minimum(a, b) - pad
    seg_hi = np.maximum(a, b) + pad
    cand = np.nonzero(np.all((hi >= seg_lo) & (lo <= seg_hi), axis=1))[0]
    if len(cand) == 0:
        return np.empty(0, dtype=int), np.empty((0, 2))
    edges = coords[cand, 1:, :] - coords[cand, :1, :]
    invT = np.linalg.inv(np.transpose(edges, (0, 2, 1)))
    lam_a_rest = np.einsum("tij,tj->ti", invT, a[None, :] - coords[cand, 0, :])
    lam_b_rest = np.einsum("tij,tj->ti", invT, b[None, :] - coords[cand, 0, :])
    lam_a = np.column_stack([1.0 - lam_a_rest.sum(axis=1), lam_a_rest])
    lam_b = np.column_stack([1.0 - lam_b_rest.sum(axis=1), lam_b_rest])
    # each barycentric coordinate is affine in t; the element interval is
    # where all of them stay nonnegative
    t0 = np.zeros(len(cand))
    t1 = np.ones(len(cand))
    d = lam_b - lam_a
    # a coordinate that is (numerically) constant along the segment must be
    # treated as flat, or roundoff noise in d produces spurious roots when
    # the segment runs along an element edge or face
    scale = np.maximum(1.0, np.maximum(np.abs(lam_a), np.abs(lam_b)).max(axis=1))
    for i in range(mesh.dim + 1):
        la, dd = lam_a[:, i], d[:, i]
        flat = np.abs(dd) <= 1e-12 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            root = -la / dd
        inc = (dd > 0.0) & ~flat
        dec = (dd < 0.0) & ~flat
        t0[inc] = np.maximum(t0[inc], root[inc])
        t1[dec] = np.minimum(t1[dec], root[dec])
        flat_out = flat & (la < -1e-9 * scale)
        t1[flat_out] = -1.0
    keep = t1 - t0 > 1e-12
    return cand[keep], np.column_stack([t0[keep], t1[keep]])


def assemble_rhs_segment(mesh: Mesh, src: SegmentMeasure, quad_order=3):
    """Load vector b_i = int_Gamma phi_i density ds.

    The segment is clipped against the elements it traverses; each covered
    parameter sub-interval is integrated once, in the lowest-index element
    containing it (basis traces agree across shared facets, so the choice
    does not change the value).
    """
    if src.dim != mesh.dim:
        raise ValueError("segment dimension does not match the mesh")
    ele_idx, intervals = _segment_intervals(mesh, src)
    if len(ele_idx) == 0:
        raise ClippingError("segment does not intersect the mesh")
    cuts = np.unique(np.concatenate([[0.0, 1.0], intervals.ravel()]))
    cuts = cuts[(cuts >= 0.0) & (cuts <= 1.0)]
    xq, wq = gauss_1d(quad_order)
    coords = mesh.element_coords()
    b = np.zeros(mesh.num_vertices)
    L = src.length
    for ta, tb in zip(cuts[:-1], cuts[1:]):
        if tb - ta <= 1e-14:
            continue
        tmid = 0.5 * (ta + tb)
        owners = ele_idx[(intervals[:, 0] <= tmid + 1e-12) & (intervals[:, 1] >= tmid - 1e-12)]
        if len(owners) == 0:
            raise ClippingError(f"segment leaves the mesh on t in ({ta:.6g}, {tb:.6g})")
        t = int(owners.min())
        tq = ta + (tb - ta) * xq
        pts = src.a[None, :] + tq[:, None] * (src.b - src.a)[None, :]
        edges = coords[t, 1:, :] - coords[t, :1, :]
        lam_rest = np.linalg.solve(edges.T, (pts - coords[t, 0]).T).T
        lam = np.column_stack([1.0 - lam_rest.sum(axis=1), lam_rest])
        dens = np.asarray(src.density(tq * L), dtype=float)
        contrib = (wq * dens) @ lam * ((tb - ta) * L)
        np.add.at(b, mesh.elements[t], contrib)
    return b


@dataclass
class SparseSystem:
    """Reduced SPD system over the free (interior) vertices."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray  # mesh-vertex index of each system unknown

    @property
    def size(self):
        return self.rhs.shape[0]

    def expand(self, u_free, num_vertices):
        """Scatter the free-vertex solution back to all mesh vertices."""
        u = np.zeros(num_vertices)
        u[self.free] = u_free
        return u


def apply_dirichlet(A, b, mesh: Mesh):
    """Remove boundary rows/columns (homogeneous data: no lifting term)."""
    free = np.nonzero(~mesh.boundary)[0]
    if len(free) == 0:
        raise EmptySystemError("every vertex is on the boundary")
    A = A.tocsr()
    reduced = A[free][:, free].tocsr()
    return SparseSystem(reduced, np.asarray(b)[free], free)


def export_matrix_market(system: SparseSystem, matrix_path, rhs_path=None):
    """Coordinate-format export of the reduced system for external checks."""
    scipy.io.mmwrite(matrix_path, system.matrix.tocoo(), symmetry="symmetric")
    if rhs_path is not None:
        scipy.io.mmwrite(rhs_path, system.rhs[:, None])
