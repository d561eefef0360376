"""Entanglement and fidelity functionals of a two-qubit state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .qmat import (
    MAGIC,
    SY,
    eigvalsh,
    kron,
    magic_transform,
    partial_transpose_B,
)

ENTANGLEMENT_TOL = 1e-10
# states with |λ_min(ρ^Γ)| below this are flagged as near the separable boundary
NEAR_BOUNDARY = 1e-8
ZERO_EIG = 1e-14

_SYSY = kron(SY, SY)


@dataclass(frozen=True)
class MeasureReport:
    singlet_fraction: float
    achieving_me_state: np.ndarray
    concurrence: float
    negativity: float
    entangled: bool
    teleport_fidelity: float
    near_boundary: bool = False


def singlet_fraction(rho: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximal overlap of ``rho`` with a maximally entangled state.

    Maximally entangled states are the real unit vectors of the magic basis
    (up to a global phase), so the maximum is the top eigenvalue of the real
    part of the magic-basis matrix. Returns ``(F, psi_max)``.
    """
    rm = magic_transform(rho).real
    w, v = np.linalg.eigh((rm + rm.T) / 2)
    x = v[:, -1]
    psi = MAGIC @ x
    # fix the global phase so the first significant amplitude is real positive
    k = int(np.argmax(np.abs(psi) > 1e-9))
    psi = psi * (abs(psi[k]) / psi[k])
    return float(w[-1]), psi


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """(σy⊗σy) ρ* (σy⊗σy), conjugation in the computational basis."""
    return _SYSY @ np.conj(rho) @ _SYSY


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence.

    With ρ = X X†, the square roots of the eigenvalues of ρρ̃ are the
    singular values of the symmetric matrix Xᵀ(σy⊗σy)X, which avoids taking
    square roots of tiny eigenvalues. Eigenvalues of ρ below ZERO_EIG are
    rounding noise and are dropped; kept, they would shift C by ~1e-8.
    """
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.where(w < ZERO_EIG, 0.0, w)
    x = v * np.sqrt(w)
    lam = np.linalg.svd(x.T @ _SYSY @ x, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def pure_concurrence(v: np.ndarray) -> float:
    """Concurrence of a pure state, 2|a00 a11 - a01 a10|."""
    v = np.asarray(v).reshape(4)
    return float(2 * abs(v[0] * v[3] - v[1] * v[2]) / np.vdot(v, v).real)


def min_pt_eigenvalue(rho: np.ndarray) -> float:
    return float(eigvalsh(partial_transpose_B(rho))[..., 0])


def negativity(rho: np.ndarray) -> float:
    """N = 2 max(0, -λ_min(ρ^Γ)), so that Bell states have N = 1."""
    return 2 * max(0.0, -min_pt_eigenvalue(rho))


def is_entangled(rho: np.ndarray, tol: float = ENTANGLEMENT_TOL) -> bool:
    """Peres-Horodecki test, exact for two qubits."""
    return min_pt_eigenvalue(rho) < -tol


def teleport_fidelity_from_F(F: float) -> float:
    """Optimal average teleportation fidelity (2F+1)/3 for singlet fraction F."""
    if not (0.25 - 1e-12 <= F <= 1 + 1e-12):
        raise InvalidStateError(f"singlet fraction {F!r} outside [1/4, 1]")
    return (2 * F + 1) / 3


def analyze(rho: np.ndarray) -> MeasureReport:
    F, psi = singlet_fraction(rho)
    lmin = min_pt_eigenvalue(rho)
    return MeasureReport(
        singlet_fraction=F,
        achieving_me_state=psi,
        concurrence=concurrence(rho),
        negativity=2 * max(0.0, -lmin),
        entangled=lmin < -ENTANGLEMENT_TOL,
        teleport_fidelity=teleport_fidelity_from_F(F),
        near_boundary=abs(lmin) < NEAR_BOUNDARY,
    )
