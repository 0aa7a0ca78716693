"""Substructured FETI solver with a multivector conjugate gradient.

The package decomposes a structure into occurrences of repeated meshed
patterns, solves the dual interface problem with preconditioned conjugate
gradient variants, and accelerates convergence by expanding each
preconditioned residual into a block of search directions obtained by
permuting (and, for elasticity, rotating) the interface partitions.
"""

from .errors import (
    BreakdownZeroDenominator,
    ConfigError,
    DimensionMismatch,
    IndefiniteMatrix,
    InterfaceMismatch,
    InvalidGeometry,
    MaxIterationsExceeded,
    MixedPatterns,
    MvFetiError,
    NegativeEigenvalueBeyondTolerance,
    NodeNotFound,
    NotElastic,
    NotSymmetric,
    SingularCoarseGram,
    SingularGlobalMatrix,
    SolverError,
    TopologyMismatch,
    TotalRankCollapse,
)
from .linalg import SymFactorization, factor_sym, inv_sqrt_sym, kernel_orthonormalize
from .meshing import PatternMesh, annulus_sector_mesh, dump_mesh, rectangle_mesh
from .model import Interface, InterfaceBlock, Occurrence, StructureModel
from .multivector import (
    ColumnRecipe,
    MultivectorMap,
    cyclic_map,
    cyclic_swap_map,
    expand,
    identity_map,
)
from .operators import (
    apply_dual_operator,
    apply_preconditioner,
    build_g_block,
    interface_jump,
    kernel_traces,
    natural_rhs,
)
from .oracle import direct_solve, relative_error
from .problems import (
    LoadCase,
    PatternStiffness,
    PlaneStrain,
    Thermal,
    apply_hinge,
    build_donut_pattern,
    build_stand_pattern,
    random_load,
    synthetic_schur_pattern,
)
from .solver import (
    ConvergenceRecord,
    CoarseProblem,
    SolveResult,
    build_coarse,
    recover_solution,
    solve_classical,
    solve_classical_mrhs,
    solve_multivector,
)

__all__ = [
    "SymFactorization",
    "factor_sym",
    "inv_sqrt_sym",
    "kernel_orthonormalize",
    "PatternMesh",
    "annulus_sector_mesh",
    "rectangle_mesh",
    "dump_mesh",
    "StructureModel",
    "Occurrence",
    "Interface",
    "InterfaceBlock",
    "MultivectorMap",
    "ColumnRecipe",
    "identity_map",
    "cyclic_map",
    "cyclic_swap_map",
    "expand",
    "apply_dual_operator",
    "apply_preconditioner",
    "natural_rhs",
    "kernel_traces",
    "build_g_block",
    "interface_jump",
    "direct_solve",
    "relative_error",
    "PatternStiffness",
    "Thermal",
    "PlaneStrain",
    "LoadCase",
    "build_donut_pattern",
    "build_stand_pattern",
    "apply_hinge",
    "synthetic_schur_pattern",
    "random_load",
    "CoarseProblem",
    "ConvergenceRecord",
    "SolveResult",
    "build_coarse",
    "recover_solution",
    "solve_classical",
    "solve_classical_mrhs",
    "solve_multivector",
    "MvFetiError",
    "NotSymmetric",
    "IndefiniteMatrix",
    "DimensionMismatch",
    "NegativeEigenvalueBeyondTolerance",
    "InvalidGeometry",
    "InterfaceMismatch",
    "NotElastic",
    "NodeNotFound",
    "TopologyMismatch",
    "MixedPatterns",
    "SolverError",
    "SingularCoarseGram",
    "BreakdownZeroDenominator",
    "TotalRankCollapse",
    "MaxIterationsExceeded",
    "ConfigError",
    "SingularGlobalMatrix",
]
