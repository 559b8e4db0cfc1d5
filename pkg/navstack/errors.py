"""Exceptions raised across the navigation stack.

Expected outcomes (no route, re-plan requests, solver statuses) are returned as
values; these classes cover caller bugs and malformed inputs.
"""


class NavStackError(RuntimeError):
    """Base class for every error raised by navstack."""


# Geometry --------------------------------------------------------------------


class GeometryError(NavStackError):
    """Raised when a geometric construction cannot be carried out."""


class DegenerateGeometryError(GeometryError):
    """Raised for zero-area or non-simple input polygons."""


class InvalidRadiusError(GeometryError):
    """Raised when a set is requested with a nonpositive size."""


# Medial axis -----------------------------------------------------------------


class EmptyMeshError(NavStackError):
    """Raised when a query needs at least one triangle."""


class CorridorNotFoundError(NavStackError):
    """Raised when p_near lies on no chain of the active route."""


class BacktrackError(NavStackError):
    """Raised when the backtrack target cannot be reached through the mesh."""


# Solver ----------------------------------------------------------------------


class SolverError(NavStackError):
    """Base class for QP and branch-and-bound failures."""


class NonConvexProblemError(SolverError):
    """Raised when the quadratic cost matrix is not symmetric PSD."""


class DimensionMismatchError(SolverError):
    """Raised when problem data have inconsistent shapes."""


class UnboundedProblemError(SolverError):
    """Raised when the interior-point iterates diverge."""


class BranchingError(SolverError):
    """Raised when branch() is called on an integral relaxation."""


# MPC -------------------------------------------------------------------------


class NoLocalFreeSpaceError(NavStackError):
    """Raised when the local partition has no cells."""


class EmptyRouteError(NavStackError):
    """Raised when a route with no waypoints is used for guidance."""


# Harness ---------------------------------------------------------------------


class ScenarioError(NavStackError):
    """Base class for scenario problems."""


class ScenarioGenerationError(ScenarioError):
    """Raised when rejection sampling runs out of attempts."""


class ScenarioFileError(ScenarioError):
    """Raised when a scenario or log file cannot be parsed."""


class EndpointNotFreeError(ScenarioError):
    """Raised when the start or the goal lies outside the arena or on an obstacle."""


class PlotError(NavStackError):
    """Raised when plots cannot be written."""
