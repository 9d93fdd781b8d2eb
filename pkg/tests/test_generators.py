"""Mesh generators: vertex counts, determinism, grading behavior."""

import numpy as np
import pytest

from singfem.errors import GradingError
from singfem.generators import (
    anisotropic_segment_mesh,
    grade_by_rescaling,
    graded_ball_by_construction,
    graded_disk_by_construction,
    isotropic_segment_mesh,
    uniform_disk_mesh,
    uniform_mesh,
)
from singfem.geometry import (
    UnitBall,
    UnitDisk,
    dist_to_source,
    domain_for_problem,
    source_for_problem,
)
from singfem.mesh import validate_mesh


def test_uniform_disk_reference_vertex_count():
    mesh = uniform_disk_mesh(1.0 / 16.0)
    assert mesh.num_vertices == 856


def test_uniform_disk_validates():
    mesh = uniform_disk_mesh(1.0 / 8.0)
    report = validate_mesh(mesh, UnitDisk())
    assert report.passed, report.messages


def test_rescaling_preserves_connectivity_and_boundary():
    base = uniform_disk_mesh(1.0 / 16.0)
    graded = grade_by_rescaling(base, 0.4)
    assert graded.num_vertices == base.num_vertices
    assert np.array_equal(graded.elements, base.elements)
    assert np.array_equal(graded.boundary, base.boundary)
    # boundary vertices stay on the unit circle
    rb = np.linalg.norm(graded.vertices[graded.boundary], axis=1)
    assert np.allclose(rb, 1.0, atol=1e-12)
    report = validate_mesh(graded, UnitDisk())
    assert report.passed, report.messages


def test_rescaling_pulls_vertices_inward():
    base = uniform_disk_mesh(1.0 / 16.0)
    graded = grade_by_rescaling(base, 0.4)
    r0 = np.linalg.norm(base.vertices, axis=1)
    r1 = np.linalg.norm(graded.vertices, axis=1)
    interior = (r0 > 1e-12) & (r0 < 1.0 - 1e-12)
    assert np.all(r1[interior] < r0[interior] + 1e-12)


def test_constructed_disk_count_near_reference():
    # reference family size ~730 at this configuration; within a factor 2
    mesh = graded_disk_by_construction(2.0**-4, 0.3)
    assert 365 <= mesh.num_vertices <= 1460
    report = validate_mesh(mesh, UnitDisk())
    assert report.passed, report.messages


def test_constructed_ball_count_near_reference():
    mesh = graded_ball_by_construction(2.0**-3, 0.25)
    assert 6700 <= mesh.num_vertices <= 27000  # ~13500 reference, factor 2
    report = validate_mesh(mesh, UnitBall())
    assert report.passed, report.messages


def test_uniform_ball_count_near_reference():
    mesh = uniform_mesh(UnitBall(), 2.0**-3)
    assert 283 <= mesh.num_vertices <= 1132  # ~566 reference, factor 2


def test_segment_mesh_counts_and_economy():
    dom = domain_for_problem("segment3d")
    src = source_for_problem("segment3d")
    aniso = anisotropic_segment_mesh(dom, src, 0.2, 0.4)
    iso = isotropic_segment_mesh(dom, src, 0.2, 0.4)
    # anisotropic grading needs fewer tetrahedra than isotropic grading
    assert aniso.num_elements < iso.num_elements
    for mesh in (aniso, iso):
        report = validate_mesh(mesh, dom)
        assert report.passed, report.messages


def test_segment_meshes_are_deterministic_per_seed():
    dom = domain_for_problem("segment3d")
    src = source_for_problem("segment3d")
    a = anisotropic_segment_mesh(dom, src, 0.4, 0.4, seed=7)
    b = anisotropic_segment_mesh(dom, src, 0.4, 0.4, seed=7)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.elements, b.elements)
    c = anisotropic_segment_mesh(dom, src, 0.4, 0.4, seed=8)
    assert a.num_vertices != c.num_vertices or not np.array_equal(a.vertices, c.vertices)


def test_graded_segment_mesh_contains_the_segment_line():
    dom = domain_for_problem("segment3d")
    src = source_for_problem("segment3d")
    mesh = anisotropic_segment_mesh(dom, src, 0.4, 0.4)
    r = dist_to_source(mesh.vertices, src)
    assert np.count_nonzero(r < 1e-12) >= 3


def test_uniform_segment_mesh_avoids_the_segment_line():
    # mu = 1 is the ungraded control: no vertices aligned with the segment
    dom = domain_for_problem("segment3d")
    src = source_for_problem("segment3d")
    mesh = anisotropic_segment_mesh(dom, src, 0.4, 1.0)
    r = dist_to_source(mesh.vertices, src)
    assert np.all(r > 1e-6)


def test_rescaling_rejects_inverting_grading():
    base = uniform_disk_mesh(1.0 / 4.0)
    with pytest.raises((GradingError, ValueError)):
        grade_by_rescaling(base, -0.5)


def test_invalid_mu_rejected():
    dom = domain_for_problem("segment3d")
    src = source_for_problem("segment3d")
    with pytest.raises(ValueError):
        anisotropic_segment_mesh(dom, src, 0.4, 0.0)
    with pytest.raises(ValueError):
        isotropic_segment_mesh(dom, src, 0.4, 1.5)


def test_segment2d_mesh_builds_and_validates():
    dom = domain_for_problem("segment2d")
    src = source_for_problem("segment2d")
    mesh = anisotropic_segment_mesh(dom, src, 2.0**-3, 0.4)
    report = validate_mesh(mesh, dom)
    assert report.passed, report.messages
