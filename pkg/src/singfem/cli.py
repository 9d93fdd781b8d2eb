"""Command-line front-end: mesh generation, single solves, convergence
studies and grading-theorem checks.

Subcommands
-----------
mesh      generate a mesh, validate it, audit its grading, write it out
solve     one mesh + solve + error summary, with optional VTK/Matrix Market
study     multi-level convergence study with CSV and a formatted table
check-mu  print the applicable grading theorem and pass/fail for a config

Configuration is taken from flags, optionally seeded from a flat
``key=value`` file (``--config``); flags override the file. The default
output directory comes from the ``SINGFEM_OUTDIR`` environment variable.

Exit codes: 0 success, 2 configuration error, 3 mesh failure, 4 solver
failure, 5 quadrature failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import (
    ClippingError,
    GradingError,
    MeshConstructionError,
    NoTheoremError,
    NotSPDError,
    QuadratureError,
    SingularEvaluationError,
    SolverError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MESH = 3
EXIT_SOLVER = 4
EXIT_QUADRATURE = 5


def _set_threads(n):
    """Best-effort thread cap for the underlying BLAS/OpenMP pools."""
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ[var] = str(n)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(n)
    except ImportError:
        pass


def read_config_file(path):
    """Flat key=value file; blank lines and # comments ignored."""
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(tok) for tok in str(text).replace(",", " ").split()]


# per-key parsers for values coming from a config file
_CONVERTERS = {
    "mu": float,
    "tau": float,
    "h": float,
    "levels": _float_list,
    "beta": _float_list,
    "sigma": _float_list,
    "quad_order": int,
    "depth": int,
    "seed": int,
    "threads": int,
    "rel_tolerance": float,
    "max_iterations": int,
    "density": float,
    "n": int,
    "m": int,
}


def build_parser():
    p = argparse.ArgumentParser(prog="singfem", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--outdir", default=None, help="output directory (default: $SINGFEM_OUTDIR or .)")
    common.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP threads")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--problem", default=None, help="point2d | point3d | segment3d | segment2d")
    problem.add_argument("--strategy", default=None, help="uniform | rescaled | constructed | anisotropic")
    problem.add_argument("--mu", type=float, default=None, help="grading parameter in (0, 1]")
    problem.add_argument("--tau", type=float, default=None, help="anisotropic zone boundary parameter")
    problem.add_argument("--h", type=float, default=None, help="mesh parameter")
    problem.add_argument("--seed", type=int, default=None, help="random seed for mesh realization")

    solveopts = argparse.ArgumentParser(add_help=False)
    solveopts.add_argument("--beta", default=None, help="weighted-L2 exponents (comma separated)")
    solveopts.add_argument("--sigma", default=None, help="weighted-H1 exponents (comma separated)")
    solveopts.add_argument("--method", default=None, help="cg | direct")
    solveopts.add_argument("--rel-tolerance", type=float, default=None, dest="rel_tolerance")
    solveopts.add_argument("--max-iterations", type=int, default=None, dest="max_iterations")
    solveopts.add_argument("--quad-order", type=int, default=None, dest="quad_order")
    solveopts.add_argument("--depth", type=int, default=None, help="near-singularity subdivision depth")
    solveopts.add_argument("--density", type=float, default=None, help="constant segment line density")

    q = sub.add_parser("mesh", parents=[common, problem], help="generate, validate and audit a mesh")
    q.add_argument("--out", default=None, help="mesh file path (default <outdir>/<name>.mesh)")
    q.add_argument("--vtk", default=None, help="also write a VTK file here")
    q.add_argument("--name", default=None)

    q = sub.add_parser("solve", parents=[common, problem, solveopts], help="single solve with error summary")
    q.add_argument("--mesh-in", default=None, help="read the mesh from a file instead of generating it")
    q.add_argument("--vtk", default=None, help="write the solution field as VTK here")
    q.add_argument("--matrix-out", default=None, help="export the reduced system (Matrix Market)")
    q.add_argument("--rhs-out", default=None, help="export the reduced right-hand side (Matrix Market)")
    q.add_argument("--name", default=None)

    q = sub.add_parser("study", parents=[common, problem, solveopts], help="multi-level convergence study")
    q.add_argument("--levels", default=None, help="decreasing mesh parameters (comma separated)")
    q.add_argument("--name", default=None)

    q = sub.add_parser("check-mu", parents=[common], help="print the grading bound for a configuration")
    q.add_argument("--n", type=int, default=None, help="space dimension (2 or 3)")
    q.add_argument("--m", type=int, default=None, help="source dimension (0 point, 1 segment)")
    q.add_argument("--mesh-kind", default=None, help="isotropic | anisotropic")
    q.add_argument("--norm", default=None, help="energy | l2")
    q.add_argument("--beta", type=float, default=None, help="weighted-L2 exponent")
    q.add_argument("--sigma", type=float, default=None, help="energy weight exponent")
    q.add_argument("--mu", type=float, default=None, help="grading parameter to check")
    return p


def merge_config(args):
    """Fill argparse ``None`` values from the config file, then defaults."""
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        for key, text in file_values.items():
            if not hasattr(args, key):
                raise ValueError(f"unknown config key {key!r}")
            if getattr(args, key) is None:
                conv = _CONVERTERS.get(key, str)
                setattr(args, key, conv(text))
    if getattr(args, "outdir", None) is None:
        args.outdir = os.environ.get("SINGFEM_OUTDIR", ".")
    return args


def _out_path(path, outdir):
    """Resolve an output path: relative paths land inside ``outdir``."""
    if path is None or os.path.isabs(path):
        return path
    return os.path.join(outdir, path)


def _study_config(args, levels):
    from .solver import SolveConfig
    from .study import StudyConfig

    solver = SolveConfig(
        method=args.method or "cg",
        rel_tolerance=args.rel_tolerance if args.rel_tolerance is not None else 1e-10,
        max_iterations=args.max_iterations,
    )
    betas = _float_list(args.beta) if args.beta is not None else []
    sigmas = _float_list(args.sigma) if args.sigma is not None else []
    return StudyConfig(
        problem=args.problem or "point2d",
        strategy=args.strategy or "rescaled",
        mu=args.mu if args.mu is not None else 0.5,
        tau=args.tau if args.tau is not None else 0.8,
        levels=levels,
        betas=betas,
        sigmas=sigmas,
        solver=solver,
        quad_order=args.quad_order if args.quad_order is not None else 3,
        subdivision_depth=args.depth if args.depth is not None else 3,
        seed=args.seed if args.seed is not None else 0,
        outdir=args.outdir,
        name=args.name or "study",
    )


def cmd_mesh(args):
    from .geometry import source_for_problem
    from .mesh import GradingSpec, grading_audit, validate_mesh
    from .meshio import write_mesh, write_vtk
    from .study import make_mesh

    problem = args.problem or "point2d"
    strategy = args.strategy or "rescaled"
    mu = args.mu if args.mu is not None else 0.5
    h = args.h if args.h is not None else 0.0625
    tau = args.tau if args.tau is not None else 0.8
    mesh, dom, src = make_mesh(problem, strategy, mu, h, tau, args.seed or 0)
    report = validate_mesh(mesh, dom)
    spec = GradingSpec(mu if strategy != "uniform" else 1.0, h, strategy, tau)
    audit = grading_audit(mesh, spec, src)
    out = _out_path(args.out, args.outdir) or os.path.join(args.outdir, f"{args.name or 'mesh'}.mesh")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    write_mesh(mesh, out)
    if args.vtk:
        write_vtk(mesh, _out_path(args.vtk, args.outdir))
    print(f"mesh: {problem} {strategy} mu={mu:g} h={h:g} -> {out}")
    print(f"  N={mesh.num_vertices} NT={mesh.num_elements}")
    print(f"  validation: {'ok' if report.passed else 'FAILED: ' + '; '.join(report.messages)}")
    print(
        f"  grading audit: max ratio {audit.max_ratio:.3f}, min ratio {audit.min_ratio:.3f},"
        f" violations {audit.violations} (tolerance {audit.tolerance:g})"
    )
    if not report.passed:
        return EXIT_MESH
    return EXIT_OK


def cmd_solve(args):
    import numpy as np

    from .analysis import WeightedNormSpec, weighted_error
    from .assembly import (
        apply_dirichlet,
        assemble_rhs_point,
        assemble_rhs_segment,
        assemble_stiffness,
        export_matrix_market,
    )
    from .exact import exact_for_problem
    from .geometry import PointDelta, SegmentMeasure, source_for_problem
    from .meshio import read_mesh, write_vtk
    from .solver import SolveConfig, solve_spd
    from .study import _density_scale, make_mesh

    problem = args.problem or "point2d"
    strategy = args.strategy or "rescaled"
    mu = args.mu if args.mu is not None else 0.5
    h = args.h if args.h is not None else 0.0625
    src = source_for_problem(problem)
    if args.density is not None:
        if not isinstance(src, SegmentMeasure):
            raise ValueError("--density only applies to segment problems")
        scale = float(args.density)
        src = SegmentMeasure(src.a, src.b, density=lambda s: np.full_like(np.asarray(s, dtype=float), scale))
    if args.mesh_in:
        mesh = read_mesh(args.mesh_in)
        mesh.attach_source_metadata(src)
    else:
        mesh, dom, _ = make_mesh(problem, strategy, mu, h, args.tau if args.tau is not None else 0.8, args.seed or 0)
    solver = SolveConfig(
        method=args.method or "cg",
        rel_tolerance=args.rel_tolerance if args.rel_tolerance is not None else 1e-10,
        max_iterations=args.max_iterations,
    )
    quad_order = args.quad_order if args.quad_order is not None else 3
    depth = args.depth if args.depth is not None else 3
    A = assemble_stiffness(mesh)
    if isinstance(src, PointDelta):
        b = assemble_rhs_point(mesh, src.location)
    else:
        b = assemble_rhs_segment(mesh, src, quad_order=quad_order)
    system = apply_dirichlet(A, b, mesh)
    if args.matrix_out:
        export_matrix_market(
            system, _out_path(args.matrix_out, args.outdir), _out_path(args.rhs_out, args.outdir)
        )
    u_free, report = solve_spd(system, solver)
    u_h = system.expand(u_free, mesh.num_vertices)
    exact, exact_grad = exact_for_problem(problem, density_scale=_density_scale(src))
    print(f"solve: {problem} {strategy} mu={mu:g} h={h:g} N={mesh.num_vertices} NT={mesh.num_elements}")
    print(f"  solver: {report.method}, {report.iterations} iterations, residual {report.residual:.3e}")
    names = [("L2", "L2_weighted", 0.0)]
    for beta in _float_list(args.beta) if args.beta is not None else []:
        names.append((f"L2_beta={beta:g}", "L2_weighted", beta))
    for sigma in _float_list(args.sigma) if args.sigma is not None else []:
        names.append((f"H1_sigma={sigma:g}", "H1semi_weighted", sigma))
    for label, kind, expo in names:
        spec = WeightedNormSpec(kind, expo, src, quad_order, depth)
        grad = exact_grad if kind == "H1semi_weighted" else None
        err = weighted_error(mesh, u_h, exact, spec, exact_grad=grad)
        print(f"  err_{label} = {err:.6e}")
    if args.vtk:
        write_vtk(mesh, _out_path(args.vtk, args.outdir), point_data={"u_h": u_h})
    return EXIT_OK


def cmd_study(args):
    from .study import run_study

    levels = _float_list(args.levels) if args.levels is not None else [2.0**-4, 2.0**-5]
    cfg = _study_config(args, levels)
    csv_path = os.path.join(cfg.outdir, f"{cfg.name}.csv")

    def progress(level, rec):
        print(f"  level {level}: h={rec.h:g} N={rec.num_vertices} NT={rec.num_elements} ({rec.seconds:.1f}s)")

    print(f"study: {cfg.problem} {cfg.strategy} mu={cfg.mu:g} levels={levels}")
    records, report, table = run_study(cfg, csv_path=csv_path, progress=progress)
    print(table)
    print(f"csv: {csv_path}")
    return EXIT_OK


def cmd_check_mu(args):
    from .theory import L2, Energy, ProblemClass, mu_bound

    n = args.n if args.n is not None else 2
    m = args.m if args.m is not None else 0
    kind = args.mesh_kind or "isotropic"
    pc = ProblemClass(n, m, kind)
    norm = (args.norm or "l2").lower()
    if norm == "energy":
        if args.sigma is None:
            raise ValueError("check-mu with --norm energy needs --sigma")
        target = Energy(args.sigma)
    elif norm == "l2":
        target = L2(args.beta if args.beta is not None else 0.0)
    else:
        raise ValueError(f"unknown norm {norm!r} (energy | l2)")
    try:
        bound = mu_bound(pc, target)
    except NoTheoremError as exc:
        print(f"no theorem: {exc}")
        return EXIT_OK
    print(bound.statement)
    if args.mu is not None:
        ok = args.mu < bound.bound if bound.strict else args.mu <= bound.bound
        print(f"mu = {args.mu:g}: {'pass' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_CONFIG
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching the config exit code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        args = merge_config(args)
        if args.threads is not None:
            _set_threads(args.threads)
        os.makedirs(args.outdir, exist_ok=True)
        handler = {
            "mesh": cmd_mesh,
            "solve": cmd_solve,
            "study": cmd_study,
            "check-mu": cmd_check_mu,
        }[args.command]
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MeshConstructionError, GradingError) as exc:
        print(f"mesh failure: {exc}", file=sys.stderr)
        return EXIT_MESH
    except (SolverError, NotSPDError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (QuadratureError, SingularEvaluationError, ClippingError) as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE


if __name__ == "__main__":
    sys.exit(main())
