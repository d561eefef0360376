"""Teleportation with a two-qubit resource, with and without local preprocessing.

The standard protocol is simulated exactly: Alice measures the input qubit
and her half of the resource in the Bell basis, Bob applies the Pauli
correction for the outcome. The resulting channel is affine on Bloch
vectors, v -> M v + c, and its average fidelity over pure inputs is
1/2 + Tr(M)/6.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import ConsistencyError, InvalidStateError
from .fstar import solve_primal
from .measures import singlet_fraction
from .normal_form import normal_form
from .qmat import (
    I2,
    PAULIS,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    SX,
    SY,
    SZ,
    apply_local,
    as_local_operator,
    dag,
    kron,
    partial_transpose_B,
    projector,
    validate_density,
)

K_COST_TOL = 1e-10
PREPROCESSING = ("LU", "LOCC", "SLOCC")

# Bell outcome on (input, A) and Bob's correction
_OUTCOMES = (
    (PSI_PLUS, I2),
    (PSI_MINUS, SZ),
    (PHI_PLUS, SX),
    (PHI_MINUS, SX @ SZ),
)
_KET00 = np.array([1, 0, 0, 0], dtype=complex)


@dataclass(frozen=True)
class ProtocolOutcome:
    success_prob: float
    rho_f: np.ndarray
    chi: np.ndarray
    k_value: float
    # W with (W⊗I)|ψ+> the maximally entangled state closest to rho_f
    frame: np.ndarray = field(repr=False)

    def output_state(self) -> np.ndarray:
        """Average state shared after the protocol, rotated so |ψ+> is the target."""
        mix = self.success_prob * self.rho_f + (1 - self.success_prob) * projector(self.chi)
        return apply_local(mix, dag(self.frame))


@dataclass(frozen=True)
class ChannelImage:
    m: np.ndarray
    c: np.ndarray
    avg_fidelity: float
    directions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    outputs: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    @property
    def samples(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.directions, self.outputs))

    def semi_axes(self) -> np.ndarray:
        """Semi-axes of the output ellipsoid, largest first."""
        return np.linalg.svd(self.m, compute_uv=False)


def _k_pt_form(rho: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    # 1/2 - <ψ+|(C⊗I) ρ^Γ (C†⊗I)|ψ+>,  (C†⊗I)|ψ+> = vec(C†)/√2 row-major
    c = dag(b) @ SY @ a
    w = dag(c).reshape(4) / np.sqrt(2)
    return float(0.5 - np.vdot(w, partial_transpose_B(rho) @ w).real)


def _k_direct(rho: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    filtered = apply_local(rho, a, b)
    p = np.trace(filtered).real
    return float(np.vdot(PSI_PLUS, filtered @ PSI_PLUS).real + (1 - p) / 2)


def k_cost(rho: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Fidelity with |ψ+> after filtering with A⊗B and preparing a product state on failure.

    Evaluated twice, through the partial-transpose formula
    K = 1/2 - <ψ+|(C⊗I)ρ^Γ(C†⊗I)|ψ+> with C = B†σy A, and directly as
    p<ψ+|ρ_f|ψ+> + (1-p)/2. A disagreement beyond 1e-10 means a convention
    bug and raises ConsistencyError.
    """
    rho = validate_density(rho)
    a = as_local_operator(a)
    b = as_local_operator(b)
    k1 = _k_pt_form(rho, a, b)
    k2 = _k_direct(rho, a, b)
    if abs(k1 - k2) > K_COST_TOL:
        raise ConsistencyError(f"cost forms disagree: {k1!r} vs {k2!r}")
    return k2


def _me_frame(rho: np.ndarray) -> np.ndarray:
    """Unitary W with (W⊗I)|ψ+> equal to the best maximally entangled state of rho."""
    _, psi = singlet_fraction(rho)
    u, _, vh = np.linalg.svd(np.sqrt(2) * psi.reshape(2, 2))
    return u @ vh


def lu_align(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rotate ``rho`` locally so its singlet fraction is attained on |ψ+>.

    Returns ``(rho_aligned, U, V)`` with V = I; one-sided rotations suffice
    because every maximally entangled state is (W⊗I)|ψ+>.
    """
    rho = validate_density(rho)
    u = dag(_me_frame(rho))
    aligned = apply_local(rho, u)
    return (aligned + dag(aligned)) / 2, u, I2.copy()


def build_protocol(rho: np.ndarray, a: np.ndarray) -> ProtocolOutcome:
    """One-way protocol: Alice filters with ``a``; on failure both prepare |chi>.

    |chi> = (W⊗I)|00> where (W⊗I)|ψ+> is the maximally entangled state
    achieving the singlet fraction of the filtered state, so the failure
    branch has overlap exactly 1/2 with it.
    """
    rho = validate_density(rho)
    a = as_local_operator(a)
    filtered = apply_local(rho, a)
    p = float(np.trace(filtered).real)
    if p <= 1e-15:
        raise InvalidStateError("filter annihilates the state (zero success probability)")
    rho_f = filtered / p
    rho_f = (rho_f + dag(rho_f)) / 2
    w = _me_frame(rho_f)
    f_f, _ = singlet_fraction(rho_f)
    return ProtocolOutcome(
        success_prob=p,
        rho_f=rho_f,
        chi=kron(w, I2) @ _KET00,
        k_value=p * f_f + (1 - p) / 2,
        frame=w,
    )


def _bob_state(sigma: np.ndarray, resource: np.ndarray) -> np.ndarray:
    """Bob's corrected state, summed over outcomes, for input qubit ``sigma``."""
    r = resource.reshape(2, 2, 2, 2)
    out = np.zeros((2, 2), dtype=complex)
    for beta, corr in _OUTCOMES:
        b = beta.reshape(2, 2)  # (input, A)
        # <β|_{in,A} (σ ⊗ ρ_AB) |β>_{in,A}
        cond = np.einsum("ia,ij,abcd,jc->bd", b.conj(), sigma, r, b)
        out += corr @ cond @ dag(corr)
    return out


def _bloch(m: np.ndarray) -> np.ndarray:
    return np.array([np.trace(m @ p).real for p in PAULIS])


def teleport_channel(resource: np.ndarray) -> ChannelImage:
    """Affine Bloch map of standard teleportation through ``resource``."""
    resource = validate_density(resource)
    c = _bloch(_bob_state(I2 / 2, resource))
    m = np.column_stack(
        [_bloch(_bob_state((I2 + p) / 2, resource)) - c for p in PAULIS]
    )
    return ChannelImage(m=m, c=c, avg_fidelity=float(0.5 + np.trace(m) / 6))


def average_fidelity(resource: np.ndarray) -> float:
    return teleport_channel(resource).avg_fidelity


def sphere_points(n: int, seed: int) -> np.ndarray:
    """Fibonacci lattice on the unit sphere, rotated by a seed-determined rotation."""
    if n < 1:
        raise InvalidStateError(f"n_samples must be positive, got {n}")
    i = np.arange(n)
    z = 1 - (2 * i + 1) / n
    r = np.sqrt(1 - z**2)
    phi = i * np.pi * (3 - np.sqrt(5))
    pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return Rotation.random(random_state=seed).apply(pts)


def preprocess(resource: np.ndarray, preprocessing: str) -> np.ndarray:
    """Resource state seen by the teleportation step after local preprocessing.

    LU: optimal local unitaries. LOCC: the optimal filter protocol averaged
    over both branches. SLOCC: the normal form, i.e. the filtered state
    conditioned on success (may raise DegenerateNormalFormError).
    """
    resource = validate_density(resource)
    if preprocessing == "LU":
        return lu_align(resource)[0]
    if preprocessing == "LOCC":
        sol = solve_primal(resource)
        if sol.filter_A is None:
            # separable: the better of the aligned state and a product state
            aligned = lu_align(resource)[0]
            if np.vdot(PSI_PLUS, aligned @ PSI_PLUS).real >= 0.5:
                return aligned
            return projector(_KET00)
        return build_protocol(resource, sol.filter_A).output_state()
    if preprocessing == "SLOCC":
        return normal_form(resource).rho_nf
    raise InvalidStateError(f"unknown preprocessing {preprocessing!r}; expected one of {PREPROCESSING}")


def bloch_image(
    resource: np.ndarray, preprocessing: str = "LU", n_samples: int = 500, seed: int = 0
) -> ChannelImage:
    """Channel after preprocessing, with sampled input directions and their images."""
    dirs = sphere_points(n_samples, seed)
    ch = teleport_channel(preprocess(resource, preprocessing))
    outs = dirs @ ch.m.T + ch.c
    return ChannelImage(m=ch.m, c=ch.c, avg_fidelity=ch.avg_fidelity, directions=dirs, outputs=outs)


def sampled_fidelity(image: ChannelImage) -> float:
    """Mean of (1 + n·r(n))/2 over the sampled inputs; cross-check of the exact average."""
    if len(image.directions) == 0:
        raise InvalidStateError("channel image carries no samples")
    return float(np.mean((1 + np.einsum("ij,ij->i", image.directions, image.outputs)) / 2))
