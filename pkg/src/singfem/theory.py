"""Admissibility predicates for the weight exponents and the grading bounds.

All statements are about the model problem -Delta u = gamma with gamma a
point mass (m = 0) or a segment measure (m = 1) in dimension n, measured in
L2_beta (weight r^beta) or in the weighted energy seminorm (weight r^sigma).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoTheoremError


@dataclass(frozen=True)
class ProblemClass:
    n: int  # space dimension
    m: int  # source dimension: 0 point, 1 segment
    mesh_kind: str = "isotropic"  # isotropic | anisotropic

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("n must be 2 or 3")
        if self.m not in (0, 1):
            raise ValueError("m must be 0 or 1")
        if self.mesh_kind not in ("isotropic", "anisotropic"):
            raise ValueError(f"unknown mesh kind {self.mesh_kind!r}")
        if self.m == 0 and self.mesh_kind == "anisotropic":
            raise ValueError("anisotropic grading only applies to segment sources")


@dataclass(frozen=True)
class Energy:
    """Target: weighted energy seminorm with weight exponent sigma."""

    sigma: float


@dataclass(frozen=True)
class L2:
    """Target: L2 norm with weight exponent beta (beta = 0 is plain L2)."""

    beta: float = 0.0


@dataclass(frozen=True)
class MuBound:
    """Strict upper bound on the grading parameter, with its provenance."""

    bound: float
    strict: bool
    statement: str


def a2_admissible(sigma, pc: ProblemClass):
    """The weight r^{2 sigma} is Muckenhoupt-A2 iff |sigma| < (n-m)/2."""
    return abs(sigma) < (pc.n - pc.m) / 2.0


def wellposed_sigma_range(pc: ProblemClass):
    """Open interval of sigma with well-posed weighted formulation:
    ((n-m)/2 - 1, (n-m)/2)."""
    half = (pc.n - pc.m) / 2.0
    return (half - 1.0, half)


def mu_bound(pc: ProblemClass, target):
    """Strict upper bound on the grading parameter mu for optimal order.

    Raises NoTheoremError where no estimate exists (segment in 3D on
    anisotropic meshes measured in unweighted L2).
    """
    if isinstance(target, Energy):
        sigma = target.sigma
        lo, hi = wellposed_sigma_range(pc)
        if not lo < sigma < hi:
            raise ValueError(f"sigma={sigma} outside the well-posed range ({lo}, {hi})")
        if pc.m == 0:
            # optimizing the free regularity parameter leaves mu < sigma + 1 - n/2 + 1
            # for the energy norm; in terms of the well-posed range this is
            # mu < sigma for n = 2 shifted by the range itself. The uniform
            # statement across n is mu < sigma - (n - 2)/2.
            bound = sigma - (pc.n - 2.0) / 2.0
            return MuBound(bound, True, f"point source, energy norm: mu < sigma - (n-2)/2 = {bound:g}")
        if pc.n == 3:
            return MuBound(sigma, True, f"segment in 3D, energy norm: mu < sigma = {sigma:g}")
        bound = sigma + 0.5
        return MuBound(bound, True, f"segment in 2D, energy norm: mu < sigma + 1/2 = {bound:g}")

    if isinstance(target, L2):
        beta = target.beta
        if pc.m == 0:
            if beta < pc.n / 4.0 - 1.0:
                raise ValueError(f"beta={beta} below the admissible floor n/4 - 1")
            if abs(beta) >= (pc.n - pc.m) / 2.0:
                raise ValueError(f"beta={beta} is not an A2-admissible exponent")
            bound = 1.0 + beta / 2.0 - pc.n / 4.0
            return MuBound(bound, True, f"point source, L2_beta: mu < 1 + beta/2 - n/4 = {bound:g}")
        if abs(beta) >= (pc.n - pc.m) / 2.0:
            raise ValueError(f"beta={beta} is not an A2-admissible exponent")
        if pc.n == 3:
            if pc.mesh_kind == "anisotropic":
                if beta <= 0.0:
                    raise NoTheoremError(
                        "segment in 3D, anisotropic mesh, unweighted L2: "
                        "no estimate is available (the duality argument needs beta > 0)"
                    )
                return MuBound(beta, True, f"segment in 3D, anisotropic, L2_beta: mu < beta = {beta:g}")
            bound = (1.0 + beta) / 2.0
            return MuBound(bound, True, f"segment in 3D, isotropic, L2_beta: mu < (1+beta)/2 = {bound:g}")
        if pc.mesh_kind == "anisotropic":
            bound = beta + 0.5
            return MuBound(bound, True, f"segment in 2D, anisotropic, L2_beta: mu < beta + 1/2 = {bound:g}")
        bound = 0.75 + beta / 2.0
        return MuBound(bound, True, f"segment in 2D, isotropic, L2_beta: mu < 3/4 + beta/2 = {bound:g}")

    raise ValueError(f"unknown target norm {target!r}")
