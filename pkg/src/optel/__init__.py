"""Two-qubit entanglement, optimal LOCC singlet fraction and teleportation."""

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateNormalFormError,
    InvalidStateError,
    OptelError,
    SolverError,
)
from .fstar import family_fstar, family_state, fstar_bounds, solve_dual, solve_primal
from .measures import analyze, concurrence, negativity, singlet_fraction
from .normal_form import normal_form
from .teleport import average_fidelity, bloch_image, build_protocol, k_cost, lu_align

__all__ = [
    "ConsistencyError",
    "ConvergenceError",
    "DegenerateNormalFormError",
    "InvalidStateError",
    "OptelError",
    "SolverError",
    "analyze",
    "average_fidelity",
    "bloch_image",
    "build_protocol",
    "concurrence",
    "family_fstar",
    "family_state",
    "fstar_bounds",
    "k_cost",
    "lu_align",
    "negativity",
    "normal_form",
    "singlet_fraction",
    "solve_dual",
    "solve_primal",
]
