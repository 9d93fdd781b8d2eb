"""Convergence study for -Delta u = delta_0 on the unit disk.

The exact solution -log(r)/(2 pi) is not in H^1, so plain P1 elements on
uniform meshes converge at a reduced rate in L2. Grading the mesh toward
the origin (pulling each vertex p to p |p|^{(1 - mu)/mu}) restores the
optimal rate ~2 once mu is below the theoretical bound, here mu < 0.7 for
the weight exponent beta = 0.4 and mu < 0.5 for plain L2.

Run:  python demos/point_source_2d.py
"""

from singfem import L2, ProblemClass, StudyConfig, mu_bound, run_study

levels = [2.0**-4, 2.0**-5, 2.0**-6]
pc = ProblemClass(n=2, m=0)

for mu in (0.4, 1.0):
    print(f"\n=== grading mu = {mu} ===")
    for target in (L2(0.0), L2(0.4)):
        bound = mu_bound(pc, target)
        verdict = "inside" if mu < bound.bound else "OUTSIDE"
        print(f"  {bound.statement}  (mu = {mu}: {verdict})")
    cfg = StudyConfig(
        problem="point2d",
        strategy="rescaled",
        mu=mu,
        levels=levels,
        betas=[0.4],
        outdir="demo_out",
        name=f"point2d_mu{mu:g}",
    )
    records, report, table = run_study(cfg)
    print(table)
