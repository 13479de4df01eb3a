from .abc import Jet, Potential
from .domain import ConvexDomain, DomainKind, GridSpec, SublevelSet, locate_base_point, sublevel_set
from .errors import AffineSphereError
from .harness import (
    StudyReport,
    conormal_suite,
    convergence_order,
    divergence_study,
    duality_suite,
    equivariance_suite,
    fubini_pick_suite,
    gradient_estimate_scan,
    gradient_ratio,
    legendre_suite,
    random_projective_maps,
    solver_equivariance,
)
from .invariants import (
    ConormalSample,
    InvariantsSample,
    affine_sphere_residual,
    centroaffine_dual,
    coincidence_defect,
    conormals_at,
    fubini_pick_at,
    geodesic_length,
    metric_at,
)
from .legendre import LegendrePair, duality_gap, gradient_identity_defect, legendre_transform
from .potentials import (
    BallPotential,
    GridPotential,
    HyperboloidPotential,
    PolynomialPotential,
    QuadraticPotential,
    RadialGraphPotential,
    BUILTINS,
    builtin_potential,
    domain_from_spec,
    exact_solution,
    hessian_at,
    load_potential_spec,
)
from .projective import ProjectiveMap, normalize_map, transform_potential
from .solver import SolverConfig, SolverReport, perturbation_factor, poisson_init, solve_affine_sphere

__all__ = [
    "AffineSphereError",
    "BUILTINS",
    "BallPotential",
    "ConormalSample",
    "ConvexDomain",
    "DomainKind",
    "GridPotential",
    "GridSpec",
    "HyperboloidPotential",
    "InvariantsSample",
    "Jet",
    "LegendrePair",
    "PolynomialPotential",
    "Potential",
    "ProjectiveMap",
    "QuadraticPotential",
    "RadialGraphPotential",
    "SolverConfig",
    "SolverReport",
    "StudyReport",
    "SublevelSet",
    "affine_sphere_residual",
    "builtin_potential",
    "centroaffine_dual",
    "coincidence_defect",
    "conormal_suite",
    "conormals_at",
    "convergence_order",
    "divergence_study",
    "domain_from_spec",
    "duality_suite",
    "duality_gap",
    "equivariance_suite",
    "exact_solution",
    "fubini_pick_at",
    "fubini_pick_suite",
    "geodesic_length",
    "gradient_estimate_scan",
    "gradient_identity_defect",
    "gradient_ratio",
    "hessian_at",
    "legendre_suite",
    "legendre_transform",
    "load_potential_spec",
    "locate_base_point",
    "metric_at",
    "normalize_map",
    "perturbation_factor",
    "poisson_init",
    "random_projective_maps",
    "solve_affine_sphere",
    "solver_equivariance",
    "sublevel_set",
    "transform_potential",
]
