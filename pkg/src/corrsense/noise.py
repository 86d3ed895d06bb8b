"""Noise classes, quasistatic sampling and Markovian dephasing dissipators.

Five classes are distinguished by Markovianity and by the joint statistics of
the two local splitting fluctuations ``delta1``, ``delta2``::

    0 QS_CORRELATED      frozen Gaussian draw, corr in (c_min, 1]
    1 QS_ANTICORRELATED  frozen Gaussian draw, corr in [-1, -c_min)
    2 QS_UNCORRELATED    frozen Gaussian draw, corr = 0, width varied
    3 MK_CORRELATED      white noise, delta1(t) = delta2(t)
    4 MK_ANTICORRELATED  white noise, delta1(t) = -delta2(t)

White-noise convention: the Hamiltonian noise ``-delta(t) * A`` with
``A = (Z1 + sign*Z2)/2`` and ``<delta(t) delta(t')> = gamma * delta(t - t')``
averages to the Lindblad term ``gamma * (A rho A - {A^2, rho}/2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import BadRange
from .model import Z1, Z2


class NoiseClass(enum.IntEnum):
    QS_CORRELATED = 0
    QS_ANTICORRELATED = 1
    QS_UNCORRELATED = 2
    MK_CORRELATED = 3
    MK_ANTICORRELATED = 4

    @property
    def markovian(self) -> bool:
        return self >= NoiseClass.MK_CORRELATED


@dataclass(frozen=True)
class QuasistaticSpec:
    sigma: float
    corr: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")
        if not abs(self.corr) <= 1:
            raise ValueError("corr must lie in [-1, 1]")


@dataclass(frozen=True)
class MarkovSpec:
    gamma: float
    sign: int

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class QuasistaticDraw:
    delta1: float
    delta2: float


@dataclass(frozen=True)
class NoiseRanges:
    """Parameter ranges for per-point class parameters (energies in units of eps)."""

    c_min: float = 0.1
    sigma0: float = 0.01
    sigma_lo: float = 0.002
    sigma_hi: float = 0.02
    gamma_lo: float = 0.001
    gamma_hi: float = 0.02
    # "draw": corr drawn per point; "fixed": corr = +/-1 exactly
    corr_mode: str = "draw"

    def validate(self):
        if not 0 <= self.c_min < 1:
            raise BadRange("c_min must lie in [0, 1)")
        if self.sigma0 < 0:
            raise BadRange("sigma0 must be non-negative")
        if not 0 <= self.sigma_lo <= self.sigma_hi:
            raise BadRange("need 0 <= sigma_lo <= sigma_hi")
        if not 0 <= self.gamma_lo <= self.gamma_hi:
            raise BadRange("need 0 <= gamma_lo <= gamma_hi")
        if self.corr_mode not in ("draw", "fixed"):
            raise BadRange("corr_mode must be 'draw' or 'fixed'")


ClassSpec = QuasistaticSpec | MarkovSpec


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream that depends only on ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def sample_quasistatic(spec: QuasistaticSpec, rng: np.random.Generator) -> QuasistaticDraw:
    z1, z2 = rng.standard_normal(2)
    c = spec.corr
    d1 = spec.sigma * z1
    d2 = spec.sigma * (c * z1 + np.sqrt(1.0 - c * c) * z2)
    return QuasistaticDraw(float(d1), float(d2))


def sample_quasistatic_batch(spec: QuasistaticSpec, seed: int, n: int, start: int = 0) -> np.ndarray:
    """Draws for realizations ``start .. start+n-1``; realization r uses stream (seed, r)."""
    out = np.empty((n, 2))
    for i in range(n):
        d = sample_quasistatic(spec, derive_rng(seed, start + i))
        out[i] = d.delta1, d.delta2
    return out


def build_dissipator(spec: MarkovSpec) -> tuple[np.ndarray, float]:
    """Jump operator ``A = (Z1 + sign*Z2)/2`` (product basis) and its rate."""
    return 0.5 * (Z1 + spec.sign * Z2), float(spec.gamma)


def draw_class_params(cls: NoiseClass, rng: np.random.Generator,
                      ranges: NoiseRanges = NoiseRanges()) -> ClassSpec:
    ranges.validate()
    cls = NoiseClass(cls)
    if cls is NoiseClass.QS_CORRELATED:
        c = 1.0 if ranges.corr_mode == "fixed" else 1.0 - rng.random() * (1.0 - ranges.c_min)
        return QuasistaticSpec(ranges.sigma0, c)
    if cls is NoiseClass.QS_ANTICORRELATED:
        c = -1.0 if ranges.corr_mode == "fixed" else -1.0 + rng.random() * (1.0 - ranges.c_min)
        return QuasistaticSpec(ranges.sigma0, c)
    if cls is NoiseClass.QS_UNCORRELATED:
        return QuasistaticSpec(float(rng.uniform(ranges.sigma_lo, ranges.sigma_hi)), 0.0)
    gamma = float(rng.uniform(ranges.gamma_lo, ranges.gamma_hi))
    return MarkovSpec(gamma, 1 if cls is NoiseClass.MK_CORRELATED else -1)
