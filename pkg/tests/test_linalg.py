import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corrsense import linalg as la
from corrsense.errors import NonHermitianInput
from corrsense.model import SystemParams, build_h_sys


def test_kron_identity():
    assert la.allclose(la.kron(la.I2, la.I2), np.eye(4))


def test_kron_xx_antidiagonal():
    xx = la.kron(la.SX, la.SX)
    assert xx[0, 3] == 1
    assert np.all(np.diag(xx) == 0)


def test_kron_qubit1_major():
    assert la.allclose(la.kron(la.SZ, la.I2), np.diag([1, 1, -1, -1]))


def test_kron_associative():
    a, b, c = la.SX, la.SY + 0.3 * la.SZ, la.SZ
    assert la.allclose(la.kron(la.kron(a, b), c), la.kron(a, la.kron(b, c)), atol=1e-14)


def test_eigh_diagonal():
    vals, vecs = la.eigh(np.diag([1.0, 2, 3, 4]))
    assert la.allclose(vals, [1, 2, 3, 4])
    assert la.allclose(vecs, np.eye(4))


def test_eigh_sigma_x():
    vals, _ = la.eigh(la.SX)
    assert la.allclose(vals, [-1, 1])


def test_eigh_system_hamiltonian():
    # even block gives -/+ sqrt(eps^2 + g^2/4), single-excitation block -/+ g/2
    vals, _ = la.eigh(build_h_sys(SystemParams(1.0, 1.0)))
    r = np.sqrt(1.25)
    assert la.allclose(vals, [-r, -0.5, 0.5, r], atol=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        la.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eigh_phase_convention():
    h = build_h_sys(SystemParams(1.0, 0.7))
    _, vecs = la.eigh(h)
    lead = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(4)]
    assert np.allclose(lead.imag, 0, atol=1e-14) and np.all(lead.real > 0)


def test_expm_zero():
    assert la.allclose(la.expm_unitary(np.zeros((4, 4)), 0.3), np.eye(4))


def test_expm_sigma_z_pi():
    assert la.allclose(la.expm_unitary(la.SZ, np.pi), -np.eye(2), atol=1e-12)


def test_expm_rabi_half_turn():
    assert la.allclose(la.expm_unitary(la.SX, np.pi / 2), -1j * la.SX, atol=1e-12)


def test_expm_non_hermitian():
    with pytest.raises(NonHermitianInput):
        la.expm_unitary(np.array([[0, 1], [2, 0]], dtype=complex), 1.0)


def _hermitian(raw):
    m = raw[:16].reshape(4, 4) + 1j * raw[16:].reshape(4, 4)
    return 0.5 * (m + m.conj().T)


finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, 32, elements=finite), st.floats(-10, 10))
def test_expm_unitary_and_norm_preserving(raw, dt):
    h = _hermitian(raw)
    u = la.expm_unitary(h, dt)
    assert la.allclose(u.conj().T @ u, np.eye(4), atol=1e-10)
    v = la.normalize(np.arange(1, 5) + 1j)
    assert abs(np.linalg.norm(u @ v) - 1) < 1e-10


@settings(max_examples=60, deadline=None)
@given(arrays(float, 32, elements=finite))
def test_eigh_reconstruction(raw):
    h = _hermitian(raw)
    vals, vecs = la.eigh(h)
    assert np.all(np.diff(vals) >= 0)
    assert la.allclose(vecs.conj().T @ vecs, np.eye(4), atol=1e-10)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) < 1e-9
    for k in range(4):
        assert np.linalg.norm(h @ vecs[:, k] - vals[k] * vecs[:, k]) < 1e-9


def test_density_matrix_checks():
    rho = la.projector(la.normalize([1, 1j, 0, 0]))
    assert la.check_density_matrix(rho) == []
    assert "negative eigenvalue" in la.check_density_matrix(np.diag([1.5, -0.5, 0, 0]))
    assert la.trace_distance(rho, rho) == pytest.approx(0, abs=1e-15)
    assert la.trace_distance(np.diag([1, 0, 0, 0]), np.diag([0, 1, 0, 0])) == pytest.approx(1)
