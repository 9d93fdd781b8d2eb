"""Conforming simplicial meshes: data structure, validation and grading audit."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Optional

import numpy as np

from .geometry import SegmentMeasure, dist_to_endpoints, dist_to_source


@dataclass
class Mesh:
    """Conforming simplicial mesh (triangles for dim=2, tets for dim=3).

    ``boundary`` flags the vertices lying on the domain boundary. Per-element
    metadata (distances to the singular set, directional sizes) is cached by
    the generators and reused by audits and error integration.
    """

    dim: int
    vertices: np.ndarray  # (N, dim)
    elements: np.ndarray  # (M, dim+1)
    boundary: np.ndarray  # (N,) bool
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.boundary = np.ascontiguousarray(self.boundary, dtype=bool)

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_elements(self):
        return self.elements.shape[0]

    def element_coords(self):
        """(M, dim+1, dim) vertex coordinates per element."""
        return self.vertices[self.elements]

    def signed_volumes(self):
        coords = self.element_coords()
        mats = coords[:, 1:, :] - coords[:, :1, :]
        return np.linalg.det(mats) / factorial(self.dim)

    def orient_positive(self):
        """Swap two local indices wherever the signed volume is negative."""
        vols = self.signed_volumes()
        flip = vols < 0.0
        if np.any(flip):
            tmp = self.elements[flip, 0].copy()
            self.elements[flip, 0] = self.elements[flip, 1]
            self.elements[flip, 1] = tmp
        return self

    def diameters(self):
        coords = self.element_coords()
        d = 0.0
        nloc = self.dim + 1
        for i in range(nloc):
            for j in range(i + 1, nloc):
                d = np.maximum(d, np.linalg.norm(coords[:, i] - coords[:, j], axis=1))
        return d

    def bbox_sizes(self):
        """(M, dim) axis-aligned extents of each element."""
        coords = self.element_coords()
        return coords.max(axis=1) - coords.min(axis=1)

    def barycenters(self):
        return self.element_coords().mean(axis=1)

    def facets(self):
        """All facets as sorted index tuples, (M*(dim+1), dim) array."""
        ele = self.elements
        nloc = self.dim + 1
        faces = []
        for k in range(nloc):
            idx = [i for i in range(nloc) if i != k]
            faces.append(ele[:, idx])
        faces = np.concatenate(faces, axis=0)
        return np.sort(faces, axis=1)

    def copy(self):
        return Mesh(
            self.dim,
            self.vertices.copy(),
            self.elements.copy(),
            self.boundary.copy(),
            dict(self.metadata),
        )

    def attach_source_metadata(self, src):
        """Cache per-element r_T, r_{T,e} and directional sizes."""
        r_vertex = dist_to_source(self.vertices, src)
        self.metadata["r_T"] = r_vertex[self.elements].min(axis=1)
        if isinstance(src, SegmentMeasure):
            re_vertex = dist_to_endpoints(self.vertices, src)
            self.metadata["r_Te"] = re_vertex[self.elements].min(axis=1)
        self.metadata["h_vec"] = self.bbox_sizes()
        self.metadata["diam"] = self.diameters()
        return self


@dataclass
class ValidationReport:
    orientation_ok: bool
    conformity_ok: bool
    boundary_ok: bool
    duplicates_ok: bool
    indices_ok: bool
    messages: list

    @property
    def passed(self):
        return (
            self.orientation_ok
            and self.conformity_ok
            and self.boundary_ok
            and self.duplicates_ok
            and self.indices_ok
        )


def validate_mesh(mesh: Mesh, domain=None, boundary_tol=1e-10, dup_tol=1e-12):
    """Report-only check of the mesh invariants.

    Checks element orientation, facet conformity (interior facets shared by
    exactly two elements), boundary-flag consistency, duplicate vertices and
    index sanity. If ``domain`` is given, flagged vertices must satisfy the
    boundary equation to ``boundary_tol``.
    """
    msgs = []

    ele = mesh.elements
    indices_ok = True
    if ele.size and (ele.min() < 0 or ele.max() >= mesh.num_vertices):
        indices_ok = False
        msgs.append("element indices out of range")
    if ele.size and np.any(np.diff(np.sort(ele, axis=1), axis=1) == 0):
        indices_ok = False
        msgs.append("element with repeated vertex index")
    if not indices_ok:
        # the geometric checks cannot run on broken connectivity
        return ValidationReport(True, True, True, True, False, msgs)

    vols = mesh.signed_volumes()
    orientation_ok = bool(np.all(vols > 0.0))
    if not orientation_ok:
        bad = np.nonzero(vols <= 0.0)[0]
        msgs.append(f"{bad.size} element(s) with non-positive volume, e.g. {bad[:5].tolist()}")

    faces = mesh.facets()
    _, inv, counts = np.unique(faces, axis=0, return_inverse=True, return_counts=True)
    face_counts = counts[inv]
    conformity_ok = bool(np.all((counts == 1) | (counts == 2)))
    if not conformity_ok:
        msgs.append("facet shared by more than two elements")

    # vertices of once-counted facets must be flagged as boundary
    bnd_faces = faces[face_counts == 1]
    boundary_ok = True
    if bnd_faces.size:
        on_bnd = np.zeros(mesh.num_vertices, dtype=bool)
        on_bnd[np.unique(bnd_faces)] = True
        if not np.all(mesh.boundary[on_bnd]):
            boundary_ok = False
            msgs.append("vertex on a boundary facet not flagged as boundary")
        # a flagged vertex appearing in no boundary facet is also suspicious
        if np.any(mesh.boundary & ~on_bnd):
            boundary_ok = False
            msgs.append("boundary-flagged vertex not on any boundary facet")
    if domain is not None and np.any(mesh.boundary):
        res = np.abs(domain.boundary_residual(mesh.vertices[mesh.boundary]))
        if np.max(res) > boundary_tol:
            boundary_ok = False
            msgs.append(f"boundary vertex off the analytic boundary by {np.max(res):.2e}")

    # duplicate vertices, detected on a rounded grid
    scale = max(1.0, float(np.max(np.abs(mesh.vertices))))
    key = np.round(mesh.vertices / (dup_tol * scale)).astype(np.int64)
    _, cnt = np.unique(key, axis=0, return_counts=True)
    duplicates_ok = bool(np.all(cnt == 1))
    if not duplicates_ok:
        msgs.append("duplicate vertices within tolerance")

    return ValidationReport(orientation_ok, conformity_ok, boundary_ok, duplicates_ok, indices_ok, msgs)


@dataclass(frozen=True)
class GradingSpec:
    """Grading rule a mesh family is audited against."""

    mu: float
    h: float
    strategy: str  # uniform | rescaled | constructed | anisotropic
    tau: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"grading parameter mu must be in (0, 1], got {self.mu}")
        if self.h <= 0.0:
            raise ValueError("mesh step h must be positive")
        if self.tau <= 0.0:
            raise ValueError("split constant tau must be positive")
        if self.strategy not in ("uniform", "rescaled", "constructed", "anisotropic"):
            raise ValueError(f"unknown grading strategy {self.strategy!r}")


@dataclass
class GradingAudit:
    ratios: np.ndarray  # measured / prescribed per element (worst direction)
    min_ratio: float
    max_ratio: float
    violations: int
    tolerance: float

    @property
    def passed(self):
        return self.violations == 0


def _isotropic_target(r, mu, h, far=1.0):
    """Prescribed isotropic diameter: h^{1/mu} on touching elements, then
    h*r^{1-mu}, capped at h in the far zone."""
    target = h * np.maximum(r, 0.0) ** (1.0 - mu)
    target = np.maximum(target, h ** (1.0 / mu))
    return np.minimum(target, h)


def grading_audit(mesh: Mesh, spec: GradingSpec, src, tolerance=4.0):
    """Compare measured element sizes against the prescribed grading rule.

    For isotropic strategies the measured size is the element diameter. For
    the anisotropic strategy the transverse and axial extents are audited
    separately (transverse against r_T, axial against r_{T,e}) inside the
    cylindrical zone; end caps are audited isotropically.
    """
    if "r_T" not in mesh.metadata:
        mesh.attach_source_metadata(src)
    diam = mesh.metadata["diam"]
    h, mu = spec.h, spec.mu
    # sizes are audited at the element barycenter; the min-vertex distance
    # cached in the metadata would over-penalize elements next to the source
    bary = mesh.barycenters()
    r_T = dist_to_source(bary, src)

    if spec.strategy == "uniform":
        ratios = diam / h
    elif spec.strategy in ("rescaled", "constructed"):
        ratios = diam / _isotropic_target(r_T, mu, h)
    elif spec.strategy == "anisotropic":
        if not isinstance(src, SegmentMeasure):
            raise ValueError("anisotropic audit requires a segment source")
        r_Te = dist_to_endpoints(bary, src)
        hvec = mesh.metadata["h_vec"]
        axis = np.argmax(np.abs(src.direction))
        trans = np.max(np.delete(hvec, axis, axis=1), axis=1)
        axial = hvec[:, axis]
        # zone decided by the barycenter: cylinder = between the endpoint
        # planes and inside the unit neighborhood; caps and B^out are isotropic
        t = (bary - src.a) @ src.direction
        in_cyl = (t > 0.0) & (t < src.length) & (r_T < 1.0)
        in_cyl &= r_Te >= spec.tau * r_T

        ratios = np.empty(mesh.num_elements)
        low = np.empty(mesh.num_elements)
        tgt_iso = _isotropic_target(r_T, mu, h)
        iso = ~in_cyl
        ratios[iso] = diam[iso] / tgt_iso[iso]
        low[iso] = ratios[iso]
        tgt_t = _isotropic_target(r_T, mu, h)
        tgt_a = _isotropic_target(r_Te, mu, h)
        # upper bound per direction; lower bound on the diameter only, since
        # a thin simplex inside a properly sized cell has a small extent in
        # some direction but still spans the local point spacing
        ratios[in_cyl] = np.maximum(
            trans[in_cyl] / tgt_t[in_cyl], axial[in_cyl] / tgt_a[in_cyl]
        )
        low[in_cyl] = diam[in_cyl] / np.minimum(tgt_t[in_cyl], tgt_a[in_cyl])
        bad = int(np.sum((ratios > tolerance) | (low < 1.0 / tolerance)))
        return GradingAudit(ratios, float(low.min()), float(ratios.max()), bad, tolerance)
    else:
        raise ValueError(f"unknown strategy {spec.strategy!r}")

    bad = int(np.sum((ratios > tolerance) | (ratios < 1.0 / tolerance)))
    return GradingAudit(ratios, float(ratios.min()), float(ratios.max()), bad, tolerance)
