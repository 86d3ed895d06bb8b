"""Dense complex linear algebra for small (4-level) quantum systems.

Operators are plain ``numpy`` complex arrays. Basis ordering for two qubits is
qubit-1-major: ``|gg>, |ge>, |eg>, |ee>`` with ``sigma_z|g> = +|g>``.
"""

from __future__ import annotations

import numpy as np

from .errors import NonHermitianInput

HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# product-basis indices
GG, GE, EG, EE = 0, 1, 2, 3


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dagger(a) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(h, atol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.allclose(h, dagger(h), rtol=0, atol=atol)


def allclose(a, b, atol: float = 1e-10) -> bool:
    """Entrywise comparison with an absolute tolerance only."""
    return np.allclose(a, b, rtol=0.0, atol=atol)


def _check_hermitian(h, atol):
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, atol):
        raise NonHermitianInput("matrix is not Hermitian within %g" % atol)
    return h


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive.

    Works on a single matrix or a stack of matrices (columns are vectors).
    """
    vecs = np.array(vecs, dtype=complex)
    idx = np.argmax(np.abs(vecs), axis=-2)
    lead = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    phase = lead / np.abs(lead)
    return vecs / phase


def eigh(h, atol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors (columns)."""
    h = _check_hermitian(h, atol)
    h = 0.5 * (h + dagger(h))
    vals, vecs = np.linalg.eigh(h)
    return vals, fix_phases(vecs)


def expm_unitary(h, dt: float, atol: float = HERMITIAN_TOL) -> np.ndarray:
    """``exp(-i h dt)`` for Hermitian ``h`` via its eigendecomposition."""
    vals, vecs = eigh(h, atol)
    return (vecs * np.exp(-1j * vals * dt)) @ dagger(vecs)


def basis_state(k: int, dim: int = 4) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def swap_operator() -> np.ndarray:
    """Qubit exchange on the two-qubit product basis."""
    s = np.zeros((4, 4), dtype=complex)
    s[GG, GG] = s[EE, EE] = 1
    s[GE, EG] = s[EG, GE] = 1
    return s


def check_density_matrix(rho, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                         pos_tol: float = 1e-9) -> list[str]:
    """Return a list of violated density-matrix invariants (empty if valid)."""
    rho = np.asarray(rho)
    problems = []
    if not np.allclose(rho, dagger(rho), rtol=0, atol=herm_tol):
        problems.append("not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        problems.append("trace %.3g != 1" % np.trace(rho).real)
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho))).min() < -pos_tol:
        problems.append("negative eigenvalue")
    return problems


def trace_distance(rho, sigma) -> float:
    d = np.asarray(rho) - np.asarray(sigma)
    d = 0.5 * (d + dagger(d))
    return 0.5 * float(np.abs(np.linalg.eigvalsh(d)).sum())
