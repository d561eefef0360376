"""Dense 2x2 / 4x4 linear algebra with two-qubit conventions.

Basis order is |00>, |01>, |10>, |11> with party A as the first tensor
factor. Partial transposition is always taken on party B. Most helpers
accept stacked inputs of shape ``(..., 4, 4)`` so that property checks can
run over large batches without Python loops.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidStateError

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
OPNORM_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

_S2 = 1 / np.sqrt(2)
# Bell vectors; PSI_PLUS is the reference maximally entangled state.
PSI_PLUS = np.array([_S2, 0, 0, _S2], dtype=complex)
PSI_MINUS = np.array([_S2, 0, 0, -_S2], dtype=complex)
PHI_PLUS = np.array([0, _S2, _S2, 0], dtype=complex)
PHI_MINUS = np.array([0, _S2, -_S2, 0], dtype=complex)

# columns: (|00>+|11>)/√2, i(|00>-|11>)/√2, i(|01>+|10>)/√2, (|01>-|10>)/√2
MAGIC = np.array(
    [
        [1, 1j, 0, 0],
        [0, 0, 1j, 1],
        [0, 0, 1j, -1],
        [1, -1j, 0, 0],
    ],
    dtype=complex,
) * _S2


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _check_shape(m: np.ndarray, shape: tuple[int, int], what: str) -> np.ndarray:
    m = np.asarray(m)
    if m.shape[-2:] != shape:
        raise InvalidStateError(f"{what}: expected trailing shape {shape}, got {m.shape}")
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of 2x2 operators; entry (2i+k, 2j+l) is a[i,j]*b[k,l]."""
    a = _check_shape(a, (2, 2), "kron")
    b = _check_shape(b, (2, 2), "kron")
    out = a[..., :, None, :, None] * b[..., None, :, None, :]
    return out.reshape(out.shape[:-4] + (4, 4))


def partial_transpose_B(rho: np.ndarray) -> np.ndarray:
    """Transpose on the second qubit: out[(i,l),(k,j)] = rho[(i,j),(k,l)]."""
    rho = _check_shape(rho, (4, 4), "partial_transpose_B")
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2, 2, 2, 2))
    return np.swapaxes(t, -3, -1).reshape(lead + (4, 4))


def partial_transpose_A(rho: np.ndarray) -> np.ndarray:
    rho = _check_shape(rho, (4, 4), "partial_transpose_A")
    lead = rho.shape[:-2]
    t = rho.reshape(lead + (2, 2, 2, 2))
    return np.swapaxes(t, -4, -2).reshape(lead + (4, 4))


def ptrace_B(rho: np.ndarray) -> np.ndarray:
    """Reduced state of party A."""
    rho = _check_shape(rho, (4, 4), "ptrace_B")
    return np.einsum("...ijkj->...ik", rho.reshape(rho.shape[:-2] + (2, 2, 2, 2)))


def ptrace_A(rho: np.ndarray) -> np.ndarray:
    """Reduced state of party B."""
    rho = _check_shape(rho, (4, 4), "ptrace_A")
    return np.einsum("...ijil->...jl", rho.reshape(rho.shape[:-2] + (2, 2, 2, 2)))


def is_hermitian(h: np.ndarray, tol: float = HERM_TOL) -> bool:
    return bool(np.max(np.abs(h - dag(h)), initial=0.0) <= tol)


def herm_eig(h: np.ndarray, tol: float = HERM_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises InvalidStateError if ``h`` deviates from Hermiticity by more than
    ``tol`` entrywise. The input is symmetrized before decomposition.
    """
    h = np.asarray(h)
    if h.shape[-1] != h.shape[-2]:
        raise InvalidStateError(f"herm_eig: matrix must be square, got {h.shape}")
    if not is_hermitian(h, tol):
        raise InvalidStateError("herm_eig: input is not Hermitian")
    return np.linalg.eigh((h + dag(h)) / 2)


def eigvalsh(h: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the Hermitian part of ``h`` (no validation)."""
    return np.linalg.eigvalsh((h + dag(h)) / 2)


def magic_transform(rho: np.ndarray) -> np.ndarray:
    """Express a 4x4 operator in the magic basis, M† rho M."""
    rho = _check_shape(rho, (4, 4), "magic_transform")
    return dag(MAGIC) @ rho @ MAGIC


def from_magic(rho_m: np.ndarray) -> np.ndarray:
    return MAGIC @ rho_m @ dag(MAGIC)


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((h + dag(h)) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ dag(v)


def psd_inv_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((h + dag(h)) / 2)
    return (v / np.sqrt(w)) @ dag(v)


def validate_density(m, tol: float = HERM_TOL) -> np.ndarray:
    """Check that ``m`` is a 4x4 two-qubit density matrix and return a copy.

    The three invariants are checked in order (Hermiticity, unit trace,
    positivity) and the first violation is reported by name.
    """
    m = np.array(m, dtype=complex)
    if m.shape != (4, 4):
        raise InvalidStateError(f"density matrix must be 4x4, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("density matrix has non-finite entries")
    if not is_hermitian(m, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1) > tol:
        raise InvalidStateError(f"density matrix trace is {float(tr)!r}, expected 1")
    m = (m + dag(m)) / 2
    lmin = np.linalg.eigvalsh(m)[0]
    if lmin < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lmin:.3e}")
    return m


def as_local_operator(a, tol: float = OPNORM_TOL) -> np.ndarray:
    """Validate a 2x2 filter with operator norm at most one."""
    a = np.array(a, dtype=complex)
    if a.shape != (2, 2):
        raise InvalidStateError(f"local operator must be 2x2, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("local operator has non-finite entries")
    smax = np.linalg.norm(a, 2)
    if smax > 1 + tol:
        raise InvalidStateError(f"local operator norm {smax:.6g} exceeds 1")
    return a


def as_pure_state(v, tol: float = 1e-12) -> np.ndarray:
    v = np.array(v, dtype=complex).reshape(-1)
    if v.shape != (4,):
        raise InvalidStateError(f"pure state must have 4 amplitudes, got {v.shape}")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1) > tol:
        raise InvalidStateError(f"pure state norm is {nrm!r}, expected 1")
    return v


def normalize_opnorm(a: np.ndarray) -> np.ndarray:
    """Rescale ``a`` so that its largest singular value is exactly one."""
    s = np.linalg.norm(a, 2)
    if s == 0:
        raise InvalidStateError("cannot normalize the zero operator")
    return a / s


def apply_local(rho: np.ndarray, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """Unnormalized (a⊗b) rho (a⊗b)†; ``b`` defaults to the identity."""
    op = kron(a, I2 if b is None else b)
    return op @ rho @ dag(op)


def random_density(rng: np.random.Generator, rank: int = 4, size: int | None = None) -> np.ndarray:
    """Hilbert-Schmidt (Ginibre) random state G G† / Tr(G G†), G of shape 4 x rank."""
    if not 1 <= rank <= 4:
        raise ValueError(f"rank must be in 1..4, got {rank}")
    shape = (4, rank) if size is None else (size, 4, rank)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    rho = g @ dag(g)
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]


def random_unitary(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def bell_diagonal_state(weights) -> np.ndarray:
    """Mixture of the magic-basis Bell states with the given weights."""
    w = np.asarray(weights, dtype=float)
    return from_magic(np.diag(w).astype(complex))
