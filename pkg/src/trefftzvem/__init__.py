"""Nonconforming Trefftz virtual element solver for the 2D Helmholtz equation.

Plane-wave trace spaces on polygonal meshes with two conditioning
treatments: exact filtering of duplicate edge directions, and a
per-edge orthonormalization built on the eigendecomposition of the
trace Gram matrix.
"""

from .assembly import BasisConfig, Result, solve_helmholtz
from .mesh import PolygonalMesh, cartesian_mesh, graded_mesh, hole_mesh, load_mesh, save_mesh
from .planewave import directions, edge_gram, filter_directions, orthonormalize_edge_basis
from .problems import BoundaryData, Solution, exact_solution, scattering_data, solution_data

__all__ = [
    "BasisConfig",
    "BoundaryData",
    "PolygonalMesh",
    "Result",
    "Solution",
    "cartesian_mesh",
    "directions",
    "edge_gram",
    "exact_solution",
    "filter_directions",
    "graded_mesh",
    "hole_mesh",
    "load_mesh",
    "orthonormalize_edge_basis",
    "save_mesh",
    "scattering_data",
    "solution_data",
    "solve_helmholtz",
]

__version__ = "0.1.0"
