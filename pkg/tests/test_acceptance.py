"""Acceptance gate: the six headline checks, one pass/fail line each.

Reference values come from the published convergence tables for this model
problem family. Two measurement conventions appear there and are matched
deliberately:

* orders quoted for the 2D point-source table correspond to the order
  between the two finest levels (``eoc_N``), while the 3D point-source
  table's single e.o.c. row corresponds to a fit over all four levels
  (``ls_eoc_N``) — its finest-pair values contain an evident digit
  misprint and are not self-consistent;
* the published error magnitudes integrate elements touching the singular
  set with the base quadrature rule only, so the magnitude comparison runs
  with ``subdivision_depth=0``. (With subdivision the near-field error is
  measured more fully and the plain-L2 magnitudes grow for weakly graded
  meshes; orders are unaffected for admissible grading.)
"""

import time

import numpy as np
import pytest

from singfem.analysis import StudyRecord, WeightedNormSpec, estimate_eoc, truncated_interpolant, weighted_error
from singfem.exact import exact_for_problem, exact_segment_3d, segment_potential_line_integral
from singfem.generators import (
    anisotropic_segment_mesh,
    grade_by_rescaling,
    graded_ball_by_construction,
    graded_disk_by_construction,
    isotropic_segment_mesh,
    uniform_disk_mesh,
)
from singfem.geometry import domain_for_problem, source_for_problem
from singfem.mesh import GradingSpec, grading_audit, validate_mesh
from singfem.meshio import read_mesh, write_mesh
from singfem.study import StudyConfig, make_mesh, run_study


def _report(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------- criterion 1


def test_criterion_1_point2d_rescaled(tmp_path):
    t0 = time.perf_counter()
    levels = [2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7]
    # per-level reference magnitudes (unit 1e-4; the stated 1e-3 column
    # scale is off by ten against its own e.o.c. rows). 1.477 corrects an
    # evident digit transposition in the printed 1.147.
    reference = {
        0.4: ([5.802, 1.477, 0.371, 0.093], [4.076, 1.022, 0.256, 0.064]),
        0.6: ([5.686, 1.812, 0.575, 0.182], [2.243, 0.569, 0.144, 0.036]),
        1.0: ([9.639, 4.822, 2.411, 1.206], [3.783, 1.443, 0.548, 0.208]),
    }
    eocs = {}
    max_dev = 0.0
    for mu, (ref_l2, ref_l2b) in reference.items():
        cfg = StudyConfig(
            problem="point2d",
            strategy="rescaled",
            mu=mu,
            levels=levels,
            betas=[0.4],
            subdivision_depth=0,
            outdir=str(tmp_path),
            name=f"t1_mu{mu:g}",
        )
        records, report, _ = run_study(cfg)
        eocs[mu] = (report["err_L2"].eoc_N, report["err_L2b0.4"].eoc_N)
        got_l2 = [r.errors["err_L2"] * 1e4 for r in records]
        got_l2b = [r.errors["err_L2b0.4"] * 1e4 for r in records]
        for got, ref in ((got_l2, ref_l2), (got_l2b, ref_l2b)):
            max_dev = max(max_dev, max(abs(g - r) / r for g, r in zip(got, ref)))
    seconds = time.perf_counter() - t0
    ok = (
        1.85 <= eocs[0.4][0] <= 2.15
        and 1.90 <= eocs[0.4][1] <= 2.15
        and 1.5 <= eocs[0.6][0] <= 1.85
        and 0.9 <= eocs[1.0][0] <= 1.15
        and max_dev <= 0.25
        and seconds < 120.0
    )
    _report(
        1,
        ok,
        f"2D point rescaled: eoc(N) mu=0.4 {eocs[0.4][0]:.3f}/{eocs[0.4][1]:.3f}, "
        f"mu=0.6 L2 {eocs[0.6][0]:.3f}, mu=1 L2 {eocs[1.0][0]:.3f}, "
        f"max level deviation {max_dev:.1%}, {seconds:.0f}s",
    )


# ---------------------------------------------------------------- criterion 2


def test_criterion_2_point3d_constructed(tmp_path):
    t0 = time.perf_counter()
    levels = [2.0**-3, 2.0 ** (-10.0 / 3.0), 2.0 ** (-11.0 / 3.0), 2.0**-4]
    results = {}
    for mu in (0.25, 0.5):
        cfg = StudyConfig(
            problem="point3d",
            strategy="constructed",
            mu=mu,
            levels=levels,
            betas=[0.7],
            outdir=str(tmp_path),
            name=f"t2_mu{mu:g}",
        )
        records, report, _ = run_study(cfg)
        results[mu] = (report["err_L2"].ls_eoc_N, report["err_L2b0.7"].ls_eoc_N, records[-1].num_vertices)
    seconds = time.perf_counter() - t0
    ok = (
        1.75 <= results[0.25][0] <= 2.1
        and 1.75 <= results[0.25][1] <= 2.1
        and 0.9 <= results[0.5][0] <= 1.25
        and results[0.5][1] >= 1.6
        and seconds < 1800.0
    )
    _report(
        2,
        ok,
        f"3D point constructed: mu=0.25 eoc {results[0.25][0]:.3f}/{results[0.25][1]:.3f} "
        f"(N up to {results[0.25][2]}), mu=0.5 eoc {results[0.5][0]:.3f}/{results[0.5][1]:.3f}, "
        f"{seconds:.0f}s",
    )


# ----------------------------------------------------- criteria 3 and 4 share


@pytest.fixture(scope="module")
def segment_studies(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("seg"))
    levels = [0.4, 0.2, 0.1]
    runs = {}
    for key, strategy, mu in (
        ("aniso04", "anisotropic", 0.4),
        ("aniso1", "anisotropic", 1.0),
        ("iso04", "constructed", 0.4),
    ):
        cfg = StudyConfig(
            problem="segment3d",
            strategy=strategy,
            mu=mu,
            levels=levels,
            betas=[0.4],
            outdir=out,
            name=key,
        )
        records, report, _ = run_study(cfg)
        runs[key] = (records, report)
    return runs


def test_criterion_3_segment3d_orders(segment_studies):
    runs = segment_studies
    a04 = runs["aniso04"][1]
    a1 = runs["aniso1"][1]
    i04 = runs["iso04"][1]
    graded = [r.errors["err_L2"] for r in runs["aniso04"][0]]
    uniform = [r.errors["err_L2"] for r in runs["aniso1"][0]]
    ok = (
        1.65 <= a04["err_L2"].eoc_h <= 2.1
        and 1.65 <= a04["err_L2b0.4"].eoc_h <= 2.1
        and 0.7 <= a1["err_L2"].eoc_h <= 1.0
        and 1.55 <= i04["err_L2"].eoc_h <= 2.0
        and 1.55 <= i04["err_L2b0.4"].eoc_h <= 2.0
        # ordered relationships: graded beats uniform at every level, and on
        # the ungraded control the weighted norm converges strictly faster
        and all(g < u for g, u in zip(graded, uniform))
        and a1["err_L2b0.4"].eoc_h > a1["err_L2"].eoc_h
    )
    _report(
        3,
        ok,
        f"3D segment: aniso mu=0.4 eoc(h) {a04['err_L2'].eoc_h:.3f}/{a04['err_L2b0.4'].eoc_h:.3f}, "
        f"mu=1 control L2 {a1['err_L2'].eoc_h:.3f} (weighted {a1['err_L2b0.4'].eoc_h:.3f}), "
        f"iso mu=0.4 {i04['err_L2'].eoc_h:.3f}/{i04['err_L2b0.4'].eoc_h:.3f}",
    )


def test_criterion_4_mesh_economy(segment_studies):
    nt_aniso = segment_studies["aniso04"][0][-1].num_elements
    nt_iso = segment_studies["iso04"][0][-1].num_elements
    ratio = nt_aniso / nt_iso
    ok = nt_aniso < nt_iso
    _report(
        4,
        ok,
        f"tet economy at mu=0.4, h=0.1: anisotropic {nt_aniso} < isotropic {nt_iso} "
        f"(ratio {ratio:.3f})",
    )


# ---------------------------------------------------------------- criterion 5


def test_criterion_5_property_suite(tmp_path):
    from singfem.assembly import (
        apply_dirichlet,
        assemble_rhs_point,
        assemble_rhs_segment,
        assemble_stiffness,
    )
    from singfem.quadrature import simplex_rule, simplex_volume
    from singfem.solver import SolveConfig, solve_spd

    t0 = time.perf_counter()
    checks = []

    # stiffness symmetry and kernel
    disk = uniform_disk_mesh(2.0**-4)
    A = assemble_stiffness(disk)
    asym = abs(A - A.T)
    checks.append(("stiffness symmetric", (asym.max() if asym.nnz else 0.0) <= 1e-12))
    checks.append(("stiffness kernel", np.max(np.abs(np.asarray(A.sum(axis=1)).ravel())) <= 1e-12))

    # RHS partition-of-unity sums
    b = assemble_rhs_point(disk, np.array([0.2, 0.3]))
    checks.append(("point rhs sums to 1", abs(b.sum() - 1.0) <= 1e-12))
    seg_mesh, seg_dom, seg_src = make_mesh("segment3d", "anisotropic", 0.4, 0.4)
    bs = assemble_rhs_segment(seg_mesh, seg_src)
    checks.append(("segment rhs sums to 1", abs(bs.sum() - 1.0) <= 1e-12))

    # quadrature exactness on degree-3 polynomials
    qok = True
    for dim in (2, 3):
        bary, w = simplex_rule(dim)
        ref = np.zeros((dim + 1, dim))
        ref[1:] = np.eye(dim)
        nodes = bary @ ref
        vol = abs(simplex_volume(ref))
        got = float(np.sum(w * nodes[:, 0] ** 3)) * vol
        from math import factorial

        want = 6.0 / factorial(dim + 3)
        qok = qok and abs(got - want) <= 1e-12
    checks.append(("quadrature degree-3 exact", qok))

    # closed form vs line-integral oracle at 100 points
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.6, 1.6, size=(200, 3))
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 0.2][:100]
    closed = exact_segment_3d(pts) + np.log(3.0) / (4.0 * np.pi)  # drop the boundary constant
    diff = np.max(np.abs(closed - segment_potential_line_integral(pts, npts=200000)))
    checks.append(("segment solution vs oracle 1e-10", diff <= 1e-10))

    # one mesh per strategy: validation + factor-4 grading audit
    psrc = source_for_problem("point2d")
    sdom, ssrc = domain_for_problem("segment3d"), source_for_problem("segment3d")
    per_strategy = [
        ("uniform", uniform_disk_mesh(2.0**-4), GradingSpec(1.0, 2.0**-4, "uniform"), psrc, None),
        (
            "rescaled",
            grade_by_rescaling(uniform_disk_mesh(2.0**-4), 0.4),
            GradingSpec(0.4, 2.0**-4, "rescaled"),
            psrc,
            None,
        ),
        (
            "constructed",
            graded_disk_by_construction(2.0**-4, 0.3),
            GradingSpec(0.3, 2.0**-4, "constructed"),
            psrc,
            None,
        ),
        (
            "anisotropic",
            anisotropic_segment_mesh(sdom, ssrc, 0.4, 0.4),
            GradingSpec(0.4, 0.4, "anisotropic"),
            ssrc,
            sdom,
        ),
    ]
    for name, mesh, spec, src, dom in per_strategy:
        mesh.attach_source_metadata(src)
        rep = validate_mesh(mesh, dom)
        audit = grading_audit(mesh, spec, src)
        checks.append((f"{name} mesh valid+audited", rep.passed and audit.violations == 0))

    # eoc reproduction from the published numbers alone
    pub = [
        StudyRecord(h, n, 2 * n, {"e": e}, 0.0)
        for h, n, e in zip(
            [2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7],
            [856, 3319, 13070, 51875],
            [5.802e-3, 1.147e-3, 0.371e-3, 0.093e-3],
        )
    ]
    eoc = estimate_eoc(pub, 2)["e"].eoc_N
    checks.append(("published eoc 2.013 +/- 0.01", abs(eoc - 2.013) <= 0.01))

    # solver residual
    system = apply_dirichlet(A, b, disk)
    _, srep = solve_spd(system, SolveConfig(method="cg"))
    checks.append(("solver residual <= 1e-10", srep.converged and srep.residual <= 1e-10))

    # mesh format round trip, bitwise
    p1, p2 = tmp_path / "a.mesh", tmp_path / "b.mesh"
    write_mesh(disk, p1)
    write_mesh(read_mesh(p1), p2)
    checks.append(("mesh round trip bitwise", p1.read_bytes() == p2.read_bytes()))

    seconds = time.perf_counter() - t0
    checks.append(("runs in under a minute", seconds < 60.0))
    failed = [name for name, ok in checks if not ok]
    _report(5, not failed, f"property suite: {len(checks)} checks, {seconds:.0f}s" + (f"; failed: {failed}" if failed else ""))


# ---------------------------------------------------------------- criterion 6


def test_criterion_6_interpolation_diagnostic():
    # truncated nodal interpolant of the 2D point-source solution on graded
    # meshes with admissible mu: weighted-energy error decreases like O(h)
    mu, sigma = 0.5, 0.7
    exact, exact_grad = exact_for_problem("point2d")
    records = []
    for h in (2.0**-4, 2.0**-5, 2.0**-6):
        mesh, dom, src = make_mesh("point2d", "rescaled", mu, h)
        coeffs = truncated_interpolant(mesh, exact, src)
        spec = WeightedNormSpec("H1semi_weighted", sigma, src)
        err = weighted_error(mesh, coeffs, exact, spec, exact_grad=exact_grad)
        records.append(StudyRecord(h, mesh.num_vertices, mesh.num_elements, {"e": err}, 0.0))
    slope = estimate_eoc(records, 2)["e"].ls_eoc_h
    ok = slope >= 0.85
    _report(
        6,
        ok,
        f"interpolation diagnostic (mu={mu}, sigma={sigma}): fitted slope {slope:.3f} >= 0.85",
    )
