"""Primal-dual interior point method for small dense Hermitian LMIs.

Solves the pair

    minimize   c·x                 maximize  -Σ_b Tr(z_b C_b)
    s.t.  s_b = C_b + Σ_k x_k A_bk ⪰ 0   s.t.  Σ_b Tr(z_b A_bk) = c_k,  z_b ⪰ 0

with Mehrotra predictor-corrector steps in Nesterov-Todd scaling. Here x is
a short real vector (16 coordinates of a 4x4 Hermitian matrix) and every
block is a small dense Hermitian matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SolverError


def hermitian_basis(n: int = 4) -> np.ndarray:
    """Trace-orthonormal real basis of n x n Hermitian matrices, shape (n², n, n)."""
    out = []
    for i in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1
        out.append(m)
    s = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = m[j, i] = s
            out.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = -1j * s
            m[j, i] = 1j * s
            out.append(m)
    return np.array(out)


def to_coords(basis: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.einsum("kab,ba->k", basis, h).real


def from_coords(basis: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.einsum("k,kab->ab", x, basis)


def _h(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


@dataclass
class Block:
    const: np.ndarray
    coeffs: np.ndarray  # (nvars, n, n)

    def slack(self, x: np.ndarray) -> np.ndarray:
        return self.const + np.einsum("k,kab->ab", x, self.coeffs)

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        return np.einsum("kab,ba->k", self.coeffs, z).real


@dataclass
class IPMResult:
    """``x`` is the feasible iterate with the lowest objective seen.

    ``z`` is the dual iterate at the best combined gap/residual; it only
    approximately satisfies the dual equality and callers should project it.
    """

    x: np.ndarray
    s: list
    z: list
    gap: float
    dual_residual: float
    iterations: int
    converged: bool


def _nt_scaling(s: np.ndarray, z: np.ndarray):
    """R with R^{-1} s R^{-†} = R† z R = diag(lam)."""
    ls = np.linalg.cholesky(_h(s))
    lz = np.linalg.cholesky(_h(z))
    u, lam, vh = np.linalg.svd(lz.conj().T @ ls)
    r = ls @ vh.conj().T / np.sqrt(lam)
    return r, lam


def _max_step(lam: np.ndarray, d: np.ndarray) -> float:
    """Largest a with diag(lam) + a d ⪰ 0 (inf if unbounded)."""
    isq = 1 / np.sqrt(lam)
    w = np.linalg.eigvalsh(_h(isq[:, None] * d * isq[None, :]))[0]
    return np.inf if w >= 0 else -1 / w


def _lyap(lam: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve diag(lam) ∘ u = rhs for u, ∘ the symmetrized product."""
    return 2 * rhs / (lam[:, None] + lam[None, :])


def _sym_prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a @ b + b @ a) / 2


def solve(
    c: np.ndarray,
    blocks: Sequence[Block],
    x0: np.ndarray,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> IPMResult:
    """Run the predictor-corrector iteration from a strictly feasible ``x0``.

    The dual starts at the identity and becomes feasible along the way.
    Stops once the complementarity gap and the dual residual are below
    ``tol`` (absolute) or when the step length collapses.
    """
    x = np.asarray(x0, dtype=float).copy()
    s = [_h(b.slack(x)) for b in blocks]
    for sb in s:
        try:
            np.linalg.cholesky(sb)
        except np.linalg.LinAlgError as exc:
            raise SolverError("starting point is not strictly feasible") from exc
    z = [np.eye(sb.shape[0], dtype=complex) for sb in s]
    m = sum(sb.shape[0] for sb in s)
    n = x.size
    best_x = None
    best_z = None
    stalls = 0
    it = 0
    for it in range(1, max_iter + 1):
        rx = c - sum(b.adjoint(zb) for b, zb in zip(blocks, z))
        rs = [sb - b.slack(x) for b, sb in zip(blocks, s)]
        gap = sum(np.trace(sb @ zb).real for sb, zb in zip(s, z))
        resid = float(np.abs(rx).max())
        obj = float(c @ x)
        if best_x is None or obj < best_x[0]:
            best_x = (obj, x.copy(), [a.copy() for a in s])
        if best_z is None or max(gap, resid) < best_z[0]:
            best_z = (max(gap, resid), [a.copy() for a in z], gap, resid)
        if gap < tol and resid < tol:
            break
        mu = gap / m
        try:
            scal = [_nt_scaling(sb, zb) for sb, zb in zip(s, z)]
        except np.linalg.LinAlgError:
            break
        winv = []
        hess = np.zeros((n, n))
        for b, (r, lam) in zip(blocks, scal):
            ri = np.linalg.inv(r)
            wi = ri.conj().T @ ri
            winv.append(wi)
            y = np.einsum("ab,kbc->kac", wi, b.coeffs)
            y = np.einsum("kac,cd->kad", y, wi)
            hess += np.einsum("kab,lba->kl", b.coeffs, y).real
        try:
            chol = np.linalg.cholesky(hess)

            def hsolve(g):
                return np.linalg.solve(chol.conj().T, np.linalg.solve(chol, g))

        except np.linalg.LinAlgError:
            # near the optimum the Schur matrix can lose definiteness to rounding

            def hsolve(g):
                return np.linalg.lstsq(hess, g, rcond=None)[0]

        def direction(rhs_c):
            us = [_lyap(lam, rc) for (r, lam), rc in zip(scal, rhs_c)]
            rus = [r @ u @ r.conj().T for (r, _), u in zip(scal, us)]
            g = -rx.copy()
            for b, wi, ru, rsb in zip(blocks, winv, rus, rs):
                g += b.adjoint(wi @ (ru + rsb) @ wi)
            dx = hsolve(g)
            dz, ds = [], []
            for b, wi, ru, rsb in zip(blocks, winv, rus, rs):
                # ds from the linear equation directly; W dz W would cancel badly
                dsb = _h(np.einsum("k,kab->ab", dx, b.coeffs) - rsb)
                ds.append(dsb)
                dz.append(_h(wi @ (ru - dsb) @ wi))
            return dx, ds, dz

        def scaled(ds, dz):
            out = []
            for (r, lam), dsb, dzb in zip(scal, ds, dz):
                ri = np.linalg.inv(r)
                out.append((_h(ri @ dsb @ ri.conj().T), _h(r.conj().T @ dzb @ r)))
            return out

        def step_len(sc):
            a = np.inf
            for (r, lam), (dst, dzt) in zip(scal, sc):
                a = min(a, _max_step(lam, dst), _max_step(lam, dzt))
            return a

        # predictor
        rhs_a = [-np.diag(lam**2).astype(complex) for _, lam in scal]
        dxa, dsa, dza = direction(rhs_a)
        sca = scaled(dsa, dza)
        aa = min(1.0, step_len(sca))
        mu_a = sum(
            np.trace((np.diag(lam) + aa * dst) @ (np.diag(lam) + aa * dzt)).real
            for (_, lam), (dst, dzt) in zip(scal, sca)
        ) / m
        sigma = min(1.0, max(0.0, mu_a / mu)) ** 3
        # corrector
        rhs_c = [
            sigma * mu * np.eye(lam.size) - np.diag(lam**2) - _sym_prod(dst, dzt)
            for (_, lam), (dst, dzt) in zip(scal, sca)
        ]
        dx, ds, dz = direction(rhs_c)
        a = min(1.0, 0.99 * step_len(scaled(ds, dz)))
        # past the attainable accuracy the steps collapse; stop there
        stalls = stalls + 1 if a < 1e-2 else 0
        if stalls >= 2:
            break
        x = x + a * dx
        s = [_h(sb + a * d) for sb, d in zip(s, ds)]
        z = [_h(zb + a * d) for zb, d in zip(z, dz)]
    _, x, s = best_x
    _, z, gap, resid = best_z
    return IPMResult(x, s, z, gap, resid, it, gap < tol and resid < tol)
