"""Mesh and field serialization: plain-text mesh format and legacy VTK.

Text format, bit-exact round-trip:
  line 1: ``dim n_vertices n_elements``
  then one vertex per line: ``x y [z] boundary_flag`` (17 significant digits)
  then one element per line: 0-based vertex indices.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh

_VTK_CELL_TYPE = {2: 5, 3: 10}  # triangle, tetrahedron


def write_mesh(mesh: Mesh, path):
    """Write the plain-text format; %.17g makes the round-trip bitwise."""
    with open(path, "w") as f:
        f.write(f"{mesh.dim} {mesh.num_vertices} {mesh.num_elements}\n")
        for v, b in zip(mesh.vertices, mesh.boundary):
            coords = " ".join("%.17g" % c for c in v)
            f.write(f"{coords} {int(b)}\n")
        for ele in mesh.elements:
            f.write(" ".join(str(i) for i in ele) + "\n")


def read_mesh(path):
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 3:
            raise ValueError(f"malformed mesh header in {path}")
        dim, nv, ne = (int(t) for t in header)
        if dim not in (2, 3):
            raise ValueError(f"unsupported mesh dimension {dim}")
        vertices = np.empty((nv, dim))
        boundary = np.empty(nv, dtype=bool)
        for i in range(nv):
            tok = f.readline().split()
            if len(tok) != dim + 1:
                raise ValueError(f"malformed vertex line {i + 2} in {path}")
            vertices[i] = [float(t) for t in tok[:dim]]
            boundary[i] = bool(int(tok[dim]))
        elements = np.empty((ne, dim + 1), dtype=np.int64)
        for i in range(ne):
            tok = f.readline().split()
            if len(tok) != dim + 1:
                raise ValueError(f"malformed element line in {path}")
            elements[i] = [int(t) for t in tok]
    if ne and (elements.min() < 0 or elements.max() >= nv):
        raise ValueError(f"element index out of range in {path}")
    return Mesh(dim, vertices, elements, boundary)


def write_vtk(mesh: Mesh, path, point_data=None, cell_data=None):
    """Legacy ASCII VTK (UNSTRUCTURED_GRID, cell types 5/10).

    ``point_data`` maps field name -> per-vertex scalar array and
    ``cell_data`` maps field name -> per-element scalar array.
    """
    nv, ne = mesh.num_vertices, mesh.num_elements
    nloc = mesh.dim + 1
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("singfem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {nv} double\n")
        for v in mesh.vertices:
            xyz = list(v) + [0.0] * (3 - mesh.dim)
            f.write("%.17g %.17g %.17g\n" % tuple(xyz))
        f.write(f"CELLS {ne} {ne * (nloc + 1)}\n")
        for ele in mesh.elements:
            f.write(f"{nloc} " + " ".join(str(i) for i in ele) + "\n")
        f.write(f"CELL_TYPES {ne}\n")
        ctype = _VTK_CELL_TYPE[mesh.dim]
        for _ in range(ne):
            f.write(f"{ctype}\n")
        if point_data:
            f.write(f"POINT_DATA {nv}\n")
            for name, values in point_data.items():
                values = np.asarray(values, dtype=float)
                if values.shape != (nv,):
                    raise ValueError(f"point data {name!r} must have one value per vertex")
                f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                for val in values:
                    f.write("%.17g\n" % val)
        if cell_data:
            f.write(f"CELL_DATA {ne}\n")
            for name, values in cell_data.items():
                values = np.asarray(values, dtype=float)
                if values.shape != (ne,):
                    raise ValueError(f"cell data {name!r} must have one value per element")
                f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                for val in values:
                    f.write("%.17g\n" % val)
