"""Maximal singlet fraction reachable by trace-preserving LOCC.

The optimum is the value of the semidefinite program

    F* = max 1/2 - Tr(X ρ^Γ)   s.t.  0 ≤ X ≤ I,  X^Γ ≤ I/2,

whose maximizer is rank one, X = (M⊗I)|ψ+><ψ+|(M†⊗I). The dual program

    G = min 1/2 + Tr(Z)/2     s.t.  Z ≥ 0,  (ρ + Z)^Γ ≥ 0

has the same value and reads as a robustness: the smallest weight p of a
state ρ_Z such that (1-p) ρ + p ρ_Z is separable, with G = 1/(2(1-p)).

Both programs are solved by a primal-dual interior point method; every
reported gap is computed from explicitly feasible X and Z.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ipm
from .errors import InvalidStateError, SolverError
from .measures import concurrence, is_entangled, negativity, pure_concurrence
from .qmat import (
    I2,
    I4,
    PSI_PLUS,
    SY,
    dag,
    eigvalsh,
    herm_eig,
    normalize_opnorm,
    partial_transpose_B,
    projector,
    validate_density,
)

RANK_ONE_TOL = 1e-6
_BASIS = _ipm.hermitian_basis(4)
_BASIS_PT = partial_transpose_B(_BASIS)
_TRACE_COORDS = _ipm.to_coords(_BASIS, I4)
_ZERO = np.zeros((4, 4), dtype=complex)


@dataclass(frozen=True)
class FstarSolution:
    fstar: float
    x_opt: np.ndarray
    rank_gap: float
    filter_A: np.ndarray | None
    duality_gap: float
    iterations: int
    entangled: bool
    filter_trivial: bool
    # dual multipliers (W1, W2, W3) for X ≥ 0, X ≤ I, X^Γ ≤ I/2
    certificate: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @property
    def teleport_fidelity(self) -> float:
        return (2 * self.fstar + 1) / 3

    def constraint_extremes(self) -> dict[str, float]:
        """Extreme eigenvalues that the constraints bound."""
        wx = eigvalsh(self.x_opt)
        wg = eigvalsh(partial_transpose_B(self.x_opt))
        return {"x_min": wx[0], "x_max": wx[-1], "xpt_min": wg[0], "xpt_max": wg[-1]}


@dataclass(frozen=True)
class DualSolution:
    g: float
    z: np.ndarray
    mixing_p: float
    rho_z: np.ndarray
    rho_mix: np.ndarray
    duality_gap: float
    lower_bound: float
    iterations: int


@dataclass(frozen=True)
class BoundsReport:
    lower: float
    upper: float
    tighter: float
    v_minus: np.ndarray
    c_vminus: float
    negativity: float
    concurrence: float
    entangled: bool


def _psd_part(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((h + dag(h)) / 2)
    return (v * np.clip(w, 0, None)) @ dag(v)


def _feasible_x(x: np.ndarray) -> np.ndarray:
    """Scale the PSD part of ``x`` into {X ≥ 0, X ≤ I, X^Γ ≤ I/2}."""
    x = _psd_part(x)
    top = max(eigvalsh(partial_transpose_B(x))[-1] / 0.5, eigvalsh(x)[-1], 1.0)
    return x / top


def _feasible_z(z: np.ndarray, rho_pt: np.ndarray) -> np.ndarray:
    """Lift the PSD part of ``z`` until (ρ + Z)^Γ ≥ 0; (δI)^Γ = δI keeps Z ≥ 0."""
    z = _psd_part(z)
    shift = -eigvalsh(rho_pt + partial_transpose_B(z))[0]
    return z + shift * I4 if shift > 0 else z


@dataclass(frozen=True)
class _PairResult:
    x: np.ndarray
    z: np.ndarray
    primal: float
    dual: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.dual - self.primal


def _solve_pair(rho_pt: np.ndarray) -> _PairResult:
    """Solve the maximization over X and the minimization over Z separately.

    Each run keeps its own variable exactly feasible, so after projection
    the X-run gives a lower bound and the Z-run an upper bound on F*. Their
    difference is the certified gap. (The multipliers of a single run are
    less accurate than its primal iterate near the optimum.)
    """
    xrun = _ipm.solve(
        _ipm.to_coords(_BASIS, rho_pt),
        [_ipm.Block(_ZERO, _BASIS), _ipm.Block(I4 / 2, -_BASIS_PT)],
        _ipm.to_coords(_BASIS, I4 / 4),
    )
    start = -eigvalsh(rho_pt)[0] + 0.25
    zrun = _ipm.solve(
        _TRACE_COORDS / 2,
        [_ipm.Block(_ZERO, _BASIS), _ipm.Block(rho_pt, _BASIS_PT)],
        _ipm.to_coords(_BASIS, start * I4),
    )
    X = _feasible_x(_ipm.from_coords(_BASIS, xrun.x))
    Z = _feasible_z(_ipm.from_coords(_BASIS, zrun.x), rho_pt)
    return _PairResult(
        x=X,
        z=Z,
        primal=0.5 - np.trace(X @ rho_pt).real,
        dual=0.5 + np.trace(Z).real / 2,
        iterations=xrun.iterations + zrun.iterations,
    )


def extract_filter(x_opt: np.ndarray) -> tuple[np.ndarray, float]:
    """Local filter on party A read off a (near) rank-one optimizer.

    With the principal eigenpair (λ, v) of ``x_opt``, the factor
    M = √(2λ)·reshape(v) satisfies X ≈ (M⊗I)|ψ+><ψ+|(M†⊗I). The filter that
    realises the cost value of X on the state (with B = I) is A = σy M†.
    A is scaled to unit operator norm with its largest entry made real
    positive. Returns ``(A, residual)`` where the residual is the
    second-largest eigenvalue of ``x_opt``.
    """
    m = x_factor(x_opt)
    a = normalize_opnorm(SY @ dag(m))
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    a = a * (abs(a[k]) / a[k])
    w = eigvalsh(x_opt)
    return a, float(w[-2])


def x_factor(x_opt: np.ndarray) -> np.ndarray:
    """The 2x2 matrix M in X ≈ (M⊗I)|ψ+><ψ+|(M†⊗I), largest entry real positive."""
    w, v = herm_eig(x_opt, tol=1e-8)
    if w[-1] <= 1e-12:
        raise InvalidStateError("zero optimizer carries no filter (separable optimum)")
    m = np.sqrt(2 * w[-1]) * v[:, -1].reshape(2, 2)
    k = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    return m * (abs(m[k]) / m[k])


def verify_rank_one(x_opt: np.ndarray, tol: float = RANK_ONE_TOL) -> bool:
    return bool(eigvalsh(x_opt)[-2] < tol)


def _is_trivial_filter(a: np.ndarray, tol: float = 1e-6) -> bool:
    s = np.linalg.svd(a, compute_uv=False)
    return bool(s[-1] > 1 - tol)


def solve_primal(rho: np.ndarray, tol: float = 1e-8) -> FstarSolution:
    """Maximal LOCC singlet fraction F* of ``rho`` with its optimal filter.

    Separable states return X = 0, F* = 1/2 and no filter. Raises
    SolverError when the certified duality gap cannot be brought below
    ``tol``.
    """
    rho = validate_density(rho)
    rho_pt = partial_transpose_B(rho)
    if not is_entangled(rho):
        # X = 0 is optimal; W1 = ρ^Γ + δI with W3 = δI certifies it
        delta = max(0.0, -eigvalsh(rho_pt)[0])
        cert = (rho_pt + delta * I4, np.zeros((4, 4), complex), delta * I4)
        return FstarSolution(
            fstar=0.5,
            x_opt=np.zeros((4, 4), dtype=complex),
            rank_gap=0.0,
            filter_A=None,
            duality_gap=2 * delta,
            iterations=0,
            entangled=False,
            filter_trivial=True,
            certificate=cert,
        )
    pair = _solve_pair(rho_pt)
    if pair.gap > tol:
        raise SolverError(f"primal solve reached gap {pair.gap:.3e} > tol {tol:.1e}")
    X = pair.x
    a, resid = extract_filter(X)
    # multipliers of X ≥ 0, X ≤ I, X^Γ ≤ I/2; the middle one is not needed
    cert = (rho_pt + partial_transpose_B(pair.z), np.zeros((4, 4), complex), pair.z)
    return FstarSolution(
        fstar=float(pair.primal),
        x_opt=X,
        rank_gap=resid,
        filter_A=a,
        duality_gap=float(max(pair.gap, 0.0)),
        iterations=pair.iterations,
        entangled=True,
        filter_trivial=_is_trivial_filter(a),
        certificate=cert,
    )


def solve_dual(rho: np.ndarray, tol: float = 1e-8) -> DualSolution:
    """Robustness form of F*: minimal mixing that makes ``rho`` separable."""
    rho = validate_density(rho)
    rho_pt = partial_transpose_B(rho)
    if not is_entangled(rho):
        return DualSolution(
            g=0.5,
            z=np.zeros((4, 4), dtype=complex),
            mixing_p=0.0,
            rho_z=I4 / 4,
            rho_mix=rho,
            duality_gap=0.0,
            lower_bound=0.5,
            iterations=0,
        )
    pair = _solve_pair(rho_pt)
    if pair.gap > tol:
        raise SolverError(f"dual solve reached gap {pair.gap:.3e} > tol {tol:.1e}")
    Z = pair.z
    trz = np.trace(Z).real
    p = trz / (1 + trz)
    return DualSolution(
        g=float(pair.dual),
        z=Z,
        mixing_p=float(p),
        rho_z=Z / trz,
        rho_mix=(rho + Z) / (1 + trz),
        duality_gap=float(max(pair.gap, 0.0)),
        lower_bound=float(pair.primal),
        iterations=pair.iterations,
    )


def fstar_bounds(rho: np.ndarray) -> BoundsReport:
    """Closed-form bracket of F* from negativity and concurrence.

    X proportional to the projector on the negative eigenvector v_- of ρ^Γ,
    scaled so that λ_max(X^Γ) = 1/2, gives the ``tighter`` value; replacing
    C(v_-) by its lower bound N/C gives ``lower``. ``upper`` is (1+N)/2.
    Separable inputs give the degenerate bracket [1/2, 1/2] with
    ``entangled`` False.
    """
    rho = validate_density(rho)
    w, v = herm_eig(partial_transpose_B(rho))
    vm = v[:, 0]
    n = negativity(rho)
    c = concurrence(rho)
    cv = pure_concurrence(vm)
    if not is_entangled(rho):
        return BoundsReport(0.5, 0.5, 0.5, vm, cv, n, c, False)
    ratio = min(1.0, n / c) if c > 0 else 1.0
    lower = 0.5 * (1 + n / (1 + np.sqrt(1 - ratio**2)))
    tighter = 0.5 * (1 + n / (1 + np.sqrt(max(0.0, 1 - cv**2))))
    upper = 0.5 * (1 + n)
    return BoundsReport(lower, upper, tighter, vm, cv, n, c, True)


def family_state(F: float) -> np.ndarray:
    """F|ψ+><ψ+| + (1-F)|01><01|, defined for 1/3 ≤ F ≤ 1."""
    if not (1 / 3 - 1e-12 <= F <= 1 + 1e-12):
        raise InvalidStateError(f"family parameter {F!r} outside [1/3, 1]")
    rho = F * projector(PSI_PLUS)
    rho[1, 1] += 1 - F
    return rho


def family_fstar(F: float) -> float:
    if not (1 / 3 - 1e-12 <= F <= 1 + 1e-12):
        raise InvalidStateError(f"family parameter {F!r} outside [1/3, 1]")
    if F <= 2 / 3:
        return 0.5 * (1 + F**2 / (4 * (1 - F)))
    return float(F)


def family_filter(F: float) -> np.ndarray:
    """diag(F/(2(1-F)), 1); for F ≥ 2/3 no filter helps and I is returned."""
    if not (1 / 3 - 1e-12 <= F <= 1 + 1e-12):
        raise InvalidStateError(f"family parameter {F!r} outside [1/3, 1]")
    if F >= 2 / 3:
        return I2.copy()
    return np.diag([F / (2 * (1 - F)), 1.0]).astype(complex)


def duality_mismatch(primal: FstarSolution, dual: DualSolution) -> float:
    return abs(primal.fstar - dual.g)
