"""Finite element laboratory for the Poisson problem with measure data.

The package solves -Delta u = gamma with gamma a point mass or a measure
supported on a segment, on simplicial meshes graded toward the singular
set (isotropically or anisotropically), and measures the error in weighted
L2 and weighted energy norms against closed-form solutions.
"""

from .analysis import (
    EocOrders,
    EocReport,
    StudyRecord,
    WeightedNormSpec,
    elements_touching_source,
    estimate_eoc,
    truncated_interpolant,
    weighted_error,
)
from .assembly import (
    SparseSystem,
    apply_dirichlet,
    assemble_rhs_point,
    assemble_rhs_segment,
    assemble_stiffness,
    export_matrix_market,
)
from .errors import (
    AssemblyError,
    ClippingError,
    EmptySystemError,
    GradingError,
    MeshConstructionError,
    NoTheoremError,
    NotSPDError,
    PointLocationError,
    QuadratureError,
    SingfemError,
    SingularEvaluationError,
    SolverError,
)
from .exact import (
    exact_for_problem,
    exact_point_2d,
    exact_point_3d,
    exact_segment_3d,
    exact_segment_3d_grad,
    segment_potential_line_integral,
)
from .generators import (
    anisotropic_segment_mesh,
    grade_by_rescaling,
    graded_ball_by_construction,
    graded_disk_by_construction,
    isotropic_segment_mesh,
    uniform_disk_mesh,
    uniform_mesh,
)
from .geometry import (
    CustomDomain,
    Domain,
    Ellipsoid,
    PointDelta,
    SegmentMeasure,
    UnitBall,
    UnitDisk,
    dist_to_source,
    domain_for_problem,
    source_for_problem,
    stadium_domain,
)
from .mesh import (
    GradingAudit,
    GradingSpec,
    Mesh,
    ValidationReport,
    grading_audit,
    validate_mesh,
)
from .meshio import read_mesh, write_mesh, write_vtk
from .solver import SolveConfig, SolveReport, solve_spd
from .study import StudyConfig, format_table, make_mesh, run_level, run_study, solve_on_mesh, write_csv
from .theory import L2, Energy, MuBound, ProblemClass, a2_admissible, mu_bound, wellposed_sigma_range

__version__ = "0.1.0"
