"""Nonconforming C-R finite elements for the planar elasticity
eigenproblem, with direct and two-grid solvers."""

from .assembly import (
    DofMap,
    ElasticParams,
    ElasticSystem,
    assemble,
    assemble_full,
    assemble_parts,
    broken_h1_seminorm,
    build_system,
    check_symmetric,
    cr_interpolate,
    edge_means,
    elementwise_divergence,
    energy_norm,
    l2_norm,
    local_basis_gradients,
    local_mass,
    local_stiffness,
)
from .eigen import EigenPair, rayleigh_quotient, smallest_eigenpairs
from .experiments import (
    ConvergenceTable,
    LockingSweep,
    MemoryCapError,
    build_domain_mesh,
    convergence_ratio,
    default_coarse_n,
    run_locking_sweep,
    run_table,
    run_twogrid_table,
)
from .mesh import (
    TriangleMesh,
    ancestor_triangles,
    build_lshape_mesh,
    build_unit_square_mesh,
    edge_midpoints,
    mesh_from_arrays,
    refine_times,
    triangle_area,
    triangle_areas,
    uniform_refine,
)
from .solve import ShiftSingularError, SolverConfig, SolverError, spd_solve, sym_indefinite_solve
from .twogrid import TwoGridResult, scheme_41, scheme_42, transfer_load

__version__ = "0.1.0"

__all__ = [
    "ConvergenceTable",
    "DofMap",
    "EigenPair",
    "ElasticParams",
    "ElasticSystem",
    "LockingSweep",
    "MemoryCapError",
    "ShiftSingularError",
    "SolverConfig",
    "SolverError",
    "TriangleMesh",
    "TwoGridResult",
    "ancestor_triangles",
    "assemble",
    "assemble_full",
    "assemble_parts",
    "broken_h1_seminorm",
    "build_domain_mesh",
    "build_lshape_mesh",
    "build_system",
    "build_unit_square_mesh",
    "check_symmetric",
    "convergence_ratio",
    "cr_interpolate",
    "default_coarse_n",
    "edge_means",
    "edge_midpoints",
    "elementwise_divergence",
    "energy_norm",
    "l2_norm",
    "local_basis_gradients",
    "local_mass",
    "local_stiffness",
    "mesh_from_arrays",
    "rayleigh_quotient",
    "refine_times",
    "run_locking_sweep",
    "run_table",
    "run_twogrid_table",
    "scheme_41",
    "scheme_42",
    "smallest_eigenpairs",
    "spd_solve",
    "sym_indefinite_solve",
    "transfer_load",
    "triangle_area",
    "triangle_areas",
    "uniform_refine",
]
