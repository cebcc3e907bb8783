"""Exception types shared across the package."""


class PolycubeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PolycubeError):
    """A mesh or labeling file could not be parsed."""


class TopologyError(PolycubeError):
    """The surface is open, non-manifold, or inconsistently oriented."""


class DegenerateError(PolycubeError):
    """A zero-area triangle survived loading / vertex merging."""


class OrientationError(PolycubeError):
    """A tetrahedron has zero signed volume."""


class SolveError(PolycubeError):
    """An iterative solve hit its iteration cap without converging."""


class InfeasibleError(PolycubeError):
    """A discrete problem has a node with every label forbidden."""


class EmptyArchiveError(PolycubeError):
    """Selection was attempted on an empty archive."""


class NoPathError(PolycubeError):
    """A directional walk could not leave its start vertex."""


class SkipWarning(UserWarning):
    """A repair was skipped because no candidate label remains."""
