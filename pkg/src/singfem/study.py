"""End-to-end experiment pipeline: mesh, solve, measure, tabulate.

A study runs one problem family over a list of mesh parameters, measures the
requested weighted norms against the closed-form solution and reports
convergence orders, a CSV file and a table with errors scaled by a power of
ten, one block per norm.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import generators
from .analysis import StudyRecord, WeightedNormSpec, estimate_eoc, weighted_error
from .assembly import (
    apply_dirichlet,
    assemble_rhs_point,
    assemble_rhs_segment,
    assemble_stiffness,
)
from .exact import exact_for_problem
from .geometry import PointDelta, SegmentMeasure, domain_for_problem, source_for_problem
from .mesh import GradingSpec, grading_audit, validate_mesh
from .solver import SolveConfig, solve_spd

PROBLEMS = ("point2d", "point3d", "segment3d", "segment2d")
STRATEGIES = ("uniform", "rescaled", "constructed", "anisotropic")


@dataclass
class StudyConfig:
    problem: str = "point2d"
    strategy: str = "rescaled"
    mu: float = 0.5
    tau: float = 0.8
    levels: list = field(default_factory=lambda: [2.0**-4, 2.0**-5])
    betas: list = field(default_factory=list)  # extra weighted-L2 exponents
    sigmas: list = field(default_factory=list)  # weighted-H1 exponents
    solver: SolveConfig = field(default_factory=SolveConfig)
    quad_order: int = 3
    subdivision_depth: int = 3
    seed: int = 0
    outdir: str = "."
    name: str = "study"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"mu must be in (0, 1], got {self.mu}")
        if len(self.levels) == 0 or any(h <= 0.0 for h in self.levels):
            raise ValueError("levels must be positive mesh parameters")
        if list(self.levels) != sorted(self.levels, reverse=True):
            raise ValueError("levels must be strictly decreasing")


def make_mesh(problem, strategy, mu, h, tau=0.8, seed=0):
    """Generate the mesh for a named problem/strategy pair."""
    dom = domain_for_problem(problem)
    src = source_for_problem(problem)
    if isinstance(src, PointDelta):
        if strategy == "uniform":
            mesh = generators.uniform_mesh(dom, h)
        elif strategy == "rescaled":
            mesh = generators.grade_by_rescaling(generators.uniform_mesh(dom, h), mu)
        elif strategy == "constructed":
            if problem == "point2d":
                mesh = generators.graded_disk_by_construction(h, mu)
            else:
                mesh = generators.graded_ball_by_construction(h, mu, seed=seed)
        else:
            raise ValueError("anisotropic grading requires a segment problem")
    else:
        if strategy == "anisotropic":
            mesh = generators.anisotropic_segment_mesh(dom, src, h, mu, tau=tau, seed=seed)
        elif strategy in ("constructed", "rescaled"):
            mesh = generators.isotropic_segment_mesh(dom, src, h, mu, seed=seed)
        elif strategy == "uniform":
            mesh = generators.isotropic_segment_mesh(dom, src, h, 1.0, seed=seed)
        else:
            raise ValueError(f"strategy {strategy!r} not available for segments")
    mesh.attach_source_metadata(src)
    return mesh, dom, src


def solve_on_mesh(mesh, src, solver_cfg=None, quad_order=3):
    """Assemble and solve; returns (full coefficient vector, solve report)."""
    A = assemble_stiffness(mesh)
    if isinstance(src, PointDelta):
        b = assemble_rhs_point(mesh, src.location)
    else:
        b = assemble_rhs_segment(mesh, src, quad_order=quad_order)
    system = apply_dirichlet(A, b, mesh)
    u_free, report = solve_spd(system, solver_cfg)
    return system.expand(u_free, mesh.num_vertices), report


def _norm_list(cfg: StudyConfig, src):
    norms = [("err_L2", WeightedNormSpec("L2_weighted", 0.0, src, cfg.quad_order, cfg.subdivision_depth))]
    for beta in cfg.betas:
        norms.append(
            (f"err_L2b{beta:g}", WeightedNormSpec("L2_weighted", beta, src, cfg.quad_order, cfg.subdivision_depth))
        )
    for sigma in cfg.sigmas:
        norms.append(
            (f"err_H1s{sigma:g}", WeightedNormSpec("H1semi_weighted", sigma, src, cfg.quad_order, cfg.subdivision_depth))
        )
    return norms


def _density_scale(src):
    """Constant line density of the segment source (1 for point sources)."""
    if isinstance(src, SegmentMeasure):
        return float(np.mean(np.asarray(src.density(np.linspace(0.0, src.length, 7)))))
    return 1.0


def run_level(cfg: StudyConfig, h):
    """One study level: mesh + solve + errors. Returns (record, mesh, u_h)."""
    t0 = time.perf_counter()
    mesh, dom, src = make_mesh(cfg.problem, cfg.strategy, cfg.mu, h, cfg.tau, cfg.seed)
    exact, exact_grad = exact_for_problem(cfg.problem, density_scale=_density_scale(src))
    u_h, report = solve_on_mesh(mesh, src, cfg.solver, cfg.quad_order)
    errors = {}
    for name, spec in _norm_list(cfg, src):
        grad = exact_grad if spec.kind == "H1semi_weighted" else None
        errors[name] = weighted_error(mesh, u_h, exact, spec, exact_grad=grad)
    rec = StudyRecord(h, mesh.num_vertices, mesh.num_elements, errors, time.perf_counter() - t0)
    return rec, mesh, u_h


_CSV_HEADER = "level,h,N,NT,err_L2,err_L2beta,err_H1sigma,seconds"


def _csv_row(level, rec: StudyRecord):
    names = list(rec.errors)
    l2 = rec.errors.get("err_L2", float("nan"))
    l2b = next((rec.errors[n] for n in names if n.startswith("err_L2b")), float("nan"))
    h1 = next((rec.errors[n] for n in names if n.startswith("err_H1s")), float("nan"))
    fmt = "%.12g"
    return ",".join(
        [
            str(level),
            fmt % rec.h,
            str(rec.num_vertices),
            str(rec.num_elements),
            fmt % l2,
            fmt % l2b,
            fmt % h1,
            fmt % rec.seconds,
        ]
    )


def write_csv(records, path):
    with open(path, "w") as f:
        f.write(_CSV_HEADER + "\n")
        for level, rec in enumerate(records):
            f.write(_csv_row(level, rec) + "\n")


def format_table(records, report=None):
    """Paper-style table: errors scaled by a stated power of ten per column."""
    names = list(records[0].errors)
    scales = {}
    for name in names:
        mx = max(rec.errors[name] for rec in records)
        scales[name] = int(np.floor(np.log10(mx))) if mx > 0.0 else 0
    head = ["h", "N", "NT"] + [
        (f"{n} x10^{scales[n]:d}" if scales[n] != 0 else n) for n in names
    ]
    lines = ["  ".join(f"{c:>14s}" for c in head)]
    for rec in records:
        row = [f"{rec.h:.6g}", str(rec.num_vertices), str(rec.num_elements)]
        row += [f"{rec.errors[n] / 10.0 ** scales[n]:.3f}" for n in names]
        lines.append("  ".join(f"{c:>14s}" for c in row))
    if report is not None:
        row = ["e.o.c.(h)", "", ""] + [f"{report[n].eoc_h:.2f}" for n in names]
        lines.append("  ".join(f"{c:>14s}" for c in row))
        row = ["e.o.c.(N)", "", ""] + [f"{report[n].eoc_N:.2f}" for n in names]
        lines.append("  ".join(f"{c:>14s}" for c in row))
    return "\n".join(lines)


def run_study(cfg: StudyConfig, csv_path=None, progress=None):
    """Run all levels; returns (records, EocReport or None, table string).

    The CSV is flushed after each level so partial results survive a failing
    level.
    """
    os.makedirs(cfg.outdir, exist_ok=True)
    if csv_path is None:
        csv_path = os.path.join(cfg.outdir, f"{cfg.name}.csv")
    records = []
    with open(csv_path, "w") as f:
        f.write(_CSV_HEADER + "\n")
        for level, h in enumerate(cfg.levels):
            rec, _, _ = run_level(cfg, h)
            records.append(rec)
            f.write(_csv_row(level, rec) + "\n")
            f.flush()
            if progress is not None:
                progress(level, rec)
    report = estimate_eoc(records, 2 if cfg.problem.endswith("2d") else 3) if len(records) > 1 else None
    return records, report, format_table(records, report)


def audit_for_config(mesh, cfg: StudyConfig, h, src):
    strategy = cfg.strategy if cfg.strategy != "uniform" else "uniform"
    spec = GradingSpec(cfg.mu if strategy != "uniform" else 1.0, h, strategy, cfg.tau)
    return grading_audit(mesh, spec, src)
