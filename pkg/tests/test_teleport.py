import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

import optel.teleport as tp
from optel.errors import ConsistencyError, InvalidStateError
from optel.fstar import family_state, solve_primal
from optel.measures import singlet_fraction
from optel.qmat import (
    I2,
    I4,
    PAULIS,
    PSI_PLUS,
    SX,
    SZ,
    partial_transpose_A,
    projector,
    random_density,
)
from optel.teleport import (
    average_fidelity,
    bloch_image,
    build_protocol,
    k_cost,
    lu_align,
    preprocess,
    sampled_fidelity,
    sphere_points,
    teleport_channel,
)

from conftest import density_matrices, local_operators

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def _circuit_output(sigma, resource):
    """Textbook circuit on qubits (in, A, B): CNOT(in→A), H(in), measure, X^m2 Z^m1 on B."""
    rho = np.kron(sigma, resource)
    u = np.kron(np.kron(H, I2), I2) @ np.kron(CNOT, I2)
    rho = u @ rho @ u.conj().T
    r = rho.reshape(2, 2, 2, 2, 2, 2)
    out = np.zeros((2, 2), dtype=complex)
    for m1 in (0, 1):
        for m2 in (0, 1):
            bob = r[m1, m2, :, m1, m2, :]
            corr = np.linalg.matrix_power(SX, m2) @ np.linalg.matrix_power(SZ, m1)
            out += corr @ bob @ corr.conj().T
    return out


def _circuit_channel(resource):
    bloch = lambda m: np.array([np.trace(m @ p).real for p in PAULIS])
    c = bloch(_circuit_output(I2 / 2, resource))
    m = np.column_stack([bloch(_circuit_output((I2 + p) / 2, resource)) - c for p in PAULIS])
    return m, c


def test_k_cost_family_example():
    rho = family_state(0.4)
    a = np.diag([1 / 3, 1])
    assert k_cost(rho, a, I2) == pytest.approx(8 / 15, abs=1e-14)
    out = build_protocol(rho, a)
    assert out.success_prob == pytest.approx(13 / 45, abs=1e-14)
    assert out.success_prob * np.vdot(PSI_PLUS, out.rho_f @ PSI_PLUS).real == pytest.approx(8 / 45)


def test_k_cost_trivial_filters(rng):
    rho = random_density(rng)
    assert k_cost(rho, I2, I2) == pytest.approx(np.vdot(PSI_PLUS, rho @ PSI_PLUS).real, abs=1e-14)
    assert k_cost(rho, np.zeros((2, 2)), I2) == pytest.approx(0.5, abs=1e-14)


def test_k_cost_rejects_large_filter(rng):
    with pytest.raises(InvalidStateError, match="norm"):
        k_cost(random_density(rng), 2 * I2, I2)


def test_k_cost_detects_convention_mismatch(rng, monkeypatch):
    monkeypatch.setattr(tp, "partial_transpose_B", partial_transpose_A)
    rho = random_density(rng)
    a = np.array([[0.3, 0.5j], [0.1, -0.4]])
    with pytest.raises(ConsistencyError, match="disagree"):
        k_cost(rho, a, I2)


@settings(max_examples=300, deadline=None)
@given(density_matrices(), local_operators(), local_operators())
def test_k_cost_forms_agree(rho, a, b):
    assert abs(tp._k_pt_form(rho, a, b) - tp._k_direct(rho, a, b)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(density_matrices(), local_operators(), local_operators())
def test_k_cost_never_exceeds_fstar(rho, a, b):
    assert k_cost(rho, a, b) <= solve_primal(rho).fstar + 1e-8


def test_build_protocol_failure_branch(rng):
    rho = random_density(rng)
    a = np.array([[0.8, 0.1], [0.2j, 0.5]])
    out = build_protocol(rho, a)
    target = np.kron(out.frame, I2) @ PSI_PLUS
    assert abs(np.vdot(target, out.chi)) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert out.k_value >= k_cost(rho, a, I2) - 1e-12
    final = out.output_state()
    assert np.trace(final).real == pytest.approx(1)
    assert np.vdot(PSI_PLUS, final @ PSI_PLUS).real == pytest.approx(out.k_value, abs=1e-12)


def test_build_protocol_zero_filter(rng):
    with pytest.raises(InvalidStateError, match="zero success"):
        build_protocol(random_density(rng), np.zeros((2, 2)))


def test_lu_align(rng):
    for _ in range(20):
        rho = random_density(rng)
        aligned, u, v = lu_align(rho)
        assert_allclose(v, I2)
        assert_allclose(u @ u.conj().T, I2, atol=1e-12)
        f = singlet_fraction(rho)[0]
        assert np.vdot(PSI_PLUS, aligned @ PSI_PLUS).real == pytest.approx(f, abs=1e-12)


def test_channel_matches_circuit(rng):
    for _ in range(20):
        rho = random_density(rng)
        m, c = _circuit_channel(rho)
        ch = teleport_channel(rho)
        assert_allclose(ch.m, m, atol=1e-13)
        assert_allclose(ch.c, c, atol=1e-13)


def test_channel_extremes():
    bell = teleport_channel(projector(PSI_PLUS))
    assert_allclose(bell.m, np.eye(3), atol=1e-14)
    assert_allclose(bell.c, 0, atol=1e-14)
    assert bell.avg_fidelity == pytest.approx(1, abs=1e-14)
    noise = teleport_channel(I4 / 4)
    assert_allclose(noise.m, 0, atol=1e-14)
    assert noise.avg_fidelity == pytest.approx(0.5, abs=1e-14)


def test_channel_is_trace_preserving_and_positive(rng):
    dirs = sphere_points(200, 3)
    for _ in range(10):
        ch = teleport_channel(random_density(rng))
        outs = dirs @ ch.m.T + ch.c
        assert np.linalg.norm(outs, axis=1).max() <= 1 + 1e-12


def test_fidelity_identity(rng):
    for _ in range(50):
        rho = random_density(rng)
        f = singlet_fraction(rho)[0]
        assert average_fidelity(lu_align(rho)[0]) == pytest.approx((2 * f + 1) / 3, abs=1e-12)


def test_sphere_points():
    pts = sphere_points(1000, 7)
    assert_allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-14)
    assert np.abs(pts.mean(axis=0)).max() < 1e-3
    assert_allclose(pts.T @ pts / 1000, np.eye(3) / 3, atol=2e-3)
    assert_allclose(sphere_points(1000, 7), pts)
    assert not np.allclose(sphere_points(1000, 8), pts)
    with pytest.raises(InvalidStateError):
        sphere_points(0, 1)


def test_bloch_image_bell_lu():
    img = bloch_image(projector(PSI_PLUS), "LU", n_samples=100, seed=1)
    assert_allclose(img.outputs, img.directions, atol=1e-12)
    assert_allclose(np.linalg.norm(img.outputs, axis=1), 1, atol=1e-12)
    assert len(img.samples) == 100


def test_bloch_image_family_modes():
    rho = family_state(0.4)
    lu = bloch_image(rho, "LU", n_samples=2000)
    locc = bloch_image(rho, "LOCC", n_samples=2000)
    slocc = bloch_image(rho, "SLOCC", n_samples=2000)
    assert lu.avg_fidelity == pytest.approx(0.6, abs=1e-12)
    assert locc.avg_fidelity == pytest.approx(31 / 45, abs=1e-6)
    assert slocc.avg_fidelity == pytest.approx(1, abs=1e-6)
    assert_allclose(slocc.semi_axes(), np.linalg.svd(slocc.m, compute_uv=False))
    for img in (lu, locc, slocc):
        assert sampled_fidelity(img) == pytest.approx(img.avg_fidelity, abs=1e-3)


def test_preprocess_separable():
    rho = I4 / 4
    assert average_fidelity(preprocess(rho, "LOCC")) == pytest.approx(2 / 3, abs=1e-12)
    with pytest.raises(InvalidStateError, match="unknown preprocessing"):
        preprocess(rho, "GHZ")


def test_sampled_fidelity_requires_samples():
    with pytest.raises(InvalidStateError, match="no samples"):
        sampled_fidelity(teleport_channel(I4 / 4))
