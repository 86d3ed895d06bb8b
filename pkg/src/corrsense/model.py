"""Two-qubit Hamiltonians, the dressed eigenbasis and its symmetry labels.

The coupled system is ``H = -(eps/2) Z1 - (eps/2) Z2 + (g/2) X1 X2``. Its
eigenstates are labelled by exchange symmetry rather than by a closed-form
energy expression:

* ``|0>``, ``|1>``: lower / upper state of the even ``{|gg>, |ee>}`` pair,
  energies ``-/+ sqrt(eps**2 + g**2/4)``
* ``|2>``: symmetric single excitation ``(|ge> + |eg>)/sqrt(2)``, energy ``+g/2``
* ``|3>``: antisymmetric single excitation ``(|ge> - |eg>)/sqrt(2)``, energy ``-g/2``

A symmetric drive ``X1 + X2`` commutes with qubit exchange, so ``|3>`` is
dark unless noise breaks the symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import DegenerateSpectrum

Z1 = la.kron(la.SZ, la.I2)
Z2 = la.kron(la.I2, la.SZ)
X1 = la.kron(la.SX, la.I2)
X2 = la.kron(la.I2, la.SX)
XX = la.kron(la.SX, la.SX)
SWAP = la.swap_operator()
DRIVE_OP = X1 + X2

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    epsilon: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.g >= 0:
            raise ValueError("g must be non-negative")

    @property
    def coupling_ratio(self) -> float:
        return self.g / self.epsilon


@dataclass(frozen=True)
class EigenFrame:
    """Labelled eigenbasis of the bare two-qubit Hamiltonian.

    ``basis[:, k]`` is eigenstate ``|k>`` in the product basis.
    """

    energies: np.ndarray
    basis: np.ndarray

    @property
    def omega_20(self) -> float:
        return float(self.energies[2] - self.energies[0])

    @property
    def omega_12(self) -> float:
        return float(self.energies[1] - self.energies[2])

    def to_eigen(self, op: np.ndarray) -> np.ndarray:
        """Product-basis operator -> eigenbasis matrix elements."""
        return la.dagger(self.basis) @ op @ self.basis

    def to_product(self, op: np.ndarray) -> np.ndarray:
        return self.basis @ op @ la.dagger(self.basis)

    def state(self, k: int) -> np.ndarray:
        return self.basis[:, k].copy()


def build_h_sys(p: SystemParams) -> np.ndarray:
    return -0.5 * p.epsilon * (Z1 + Z2) + 0.5 * p.g * XX


def build_h_noise(delta1: float, delta2: float) -> np.ndarray:
    return -0.5 * delta1 * Z1 - 0.5 * delta2 * Z2


def exchange_parity(v, atol: float = 1e-8) -> str:
    """``'even'``, ``'odd'`` or ``'mixed'`` behaviour of a state under qubit swap."""
    v = np.asarray(v, dtype=complex)
    sv = SWAP @ v
    if np.allclose(sv, v, rtol=0, atol=atol):
        return "even"
    if np.allclose(sv, -v, rtol=0, atol=atol):
        return "odd"
    return "mixed"


def build_eigenframe(p: SystemParams) -> EigenFrame:
    vals, vecs = la.eigh(build_h_sys(p))
    gaps = np.diff(vals)
    if np.any(gaps <= DEGENERACY_TOL * p.epsilon):
        raise DegenerateSpectrum("eigenvalues %s are not separated" % np.round(vals, 12))

    odd, pair, single = [], [], []
    for k in range(4):
        v = vecs[:, k]
        if exchange_parity(v) == "odd":
            odd.append(k)
        elif abs(v[la.GG]) ** 2 + abs(v[la.EE]) ** 2 > 0.5:
            pair.append(k)
        else:
            single.append(k)
    if (len(odd), len(pair), len(single)) != (1, 2, 1):
        raise DegenerateSpectrum("could not assign symmetry labels to the eigenbasis")

    # eigh sorts ascending, so pair[0] is the ground state
    order = [pair[0], pair[1], single[0], odd[0]]
    return EigenFrame(energies=vals[order].copy(), basis=vecs[:, order].copy())


def build_h_rwa(omega_p: float, omega_s: float) -> np.ndarray:
    """Ladder Hamiltonian ``(Op|0><2| + Os|1><2| + h.c.)/sqrt(2)`` in eigen labels."""
    h = np.zeros((4, 4), dtype=complex)
    h[0, 2] = h[2, 0] = omega_p / np.sqrt(2)
    h[1, 2] = h[2, 1] = omega_s / np.sqrt(2)
    return h
