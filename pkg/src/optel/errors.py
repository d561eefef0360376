"""Exception types raised by optel."""


class OptelError(Exception):
    """Base class for all optel errors."""


class InvalidStateError(OptelError, ValueError):
    """Input matrix is not a valid two-qubit density matrix (or operator)."""


class DegenerateNormalFormError(OptelError):
    """Local filtering hit a rank-deficient marginal; no full-rank normal form."""


class ConvergenceError(OptelError):
    """An iterative routine failed to reach its tolerance within the cap."""


class SolverError(OptelError):
    """The semidefinite solver could not produce a certified solution."""


class ConsistencyError(OptelError):
    """Two independent evaluations of the same quantity disagree."""
