"""Polycube labelings of triangle surface meshes via genetic optimization.

A labeling assigns one of the six base axis directions to every boundary
triangle, prescribing the polycube face it maps to.  This package loads
meshes, builds an initial labeling with a graph-cut, scores labelings with
a four-term fitness built around a fast least-squares surface polycube,
and improves them with an archive-based genetic loop of mutations,
crossover, and deterministic repairs.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateError,
    EmptyArchiveError,
    InfeasibleError,
    NoPathError,
    OrientationError,
    ParseError,
    PolycubeError,
    SkipWarning,
    SolveError,
    TopologyError,
)
from .mesh import SurfaceMesh, TetMesh, extract_boundary
from .meshio import load_surface, load_tet_medit
from .labeling import Labeling, naive_normal_labeling, read_labeling, write_labeling

__all__ = [
    "__version__",
    "DegenerateError", "EmptyArchiveError", "InfeasibleError", "NoPathError",
    "OrientationError", "ParseError", "PolycubeError", "SkipWarning",
    "SolveError", "TopologyError",
    "SurfaceMesh", "TetMesh", "extract_boundary",
    "load_surface", "load_tet_medit",
    "Labeling", "naive_normal_labeling", "read_labeling", "write_labeling",
]
