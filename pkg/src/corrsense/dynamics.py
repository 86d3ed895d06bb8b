"""Propagation of the driven, noisy two-qubit system.

Two backends share one compiled RK4 core:

``rotating_rwa``
    Works in the eigenbasis of the static part ``H_sys + H_noise`` (exact for
    quasistatic noise), in a frame rotating at the bare energies ``E_k``. Each
    drive tone keeps only the transitions it is resonant with in the bare
    spectrum. Besides the ladder ``0-2-1``, the tones are also resonant with
    ``0-3`` (Stokes) and ``3-1`` (pump); those couplings vanish for a symmetric
    system and switch on when noise mixes ``|2>`` and ``|3>``.
    Markovian dissipators are carried into the frame exactly, with their
    oscillating phases.

``lab_frame``
    Direct integration of ``H_sys + H_noise + W(t)(X1 + X2)`` with both
    carriers. Slow; used to validate the rotating-frame backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg as la
from ._kernels import lindblad_rk4, schrodinger_rk4
from .control import DriveSpec, drive_value, envelope
from .errors import NormDrift, PositivityLoss, StepTooLarge
from .model import DRIVE_OP, EigenFrame, SystemParams, Z1, Z2, build_eigenframe, build_h_sys
from .noise import MarkovSpec, QuasistaticDraw, QuasistaticSpec, build_dissipator, sample_quasistatic_batch

BACKENDS = ("rotating_rwa", "lab_frame")
DEFAULT_DT = {"rotating_rwa": 0.25, "lab_frame": None}  # lab default derived from omega_20
NORM_TOL = 1e-6
POSITIVITY_TOL = 1e-6
RESONANCE_TOL = 1e-9
# white-noise kicks are piecewise constant per step; the default step is finer
# than for smooth drives and also bounds the typical kick phase sqrt(gamma*dt)
TRAJECTORY_DT = 0.05
TRAJECTORY_KICK = 0.016


@dataclass(frozen=True)
class IntegratorConfig:
    backend: str = "rotating_rwa"
    dt: float | None = None
    method: str = "rk4_fixed"

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError("unknown backend %r" % self.backend)
        if self.method != "rk4_fixed":
            raise ValueError("only rk4_fixed is implemented")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")

    def step(self, d: DriveSpec) -> float:
        """Requested step, checked against the backend's resolution limit."""
        if self.backend == "lab_frame":
            limit = 0.02 * 2 * np.pi / d.omega_20
            dt = 0.005 * 2 * np.pi / d.omega_20 if self.dt is None else self.dt
        else:
            peak = max(d.pump.peak, d.stokes.peak)
            limit = 0.05 / peak if peak > 0 else np.inf
            dt = DEFAULT_DT["rotating_rwa"] if self.dt is None else self.dt
        if dt > limit * (1 + 1e-12):
            raise StepTooLarge("dt=%g exceeds %g for backend %s" % (dt, limit, self.backend))
        return dt


@dataclass
class RunResult:
    """Final state in the product basis plus its bare-eigenbasis populations."""

    final_state: np.ndarray
    populations: np.ndarray
    xi_r: float
    times: np.ndarray | None = field(default=None, repr=False)
    population_trace: np.ndarray | None = field(default=None, repr=False)
    xi_trace: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class MonteCarloConfig:
    n_realizations: int = 500
    master_seed: int = 0
    parallel: bool = False
    workers: int | None = None
    chunk: int = 64

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")


# ---------------------------------------------------------------- grids


@dataclass(frozen=True)
class _Grid:
    t0: float
    dt: float
    n_steps: int

    @property
    def half_times(self) -> np.ndarray:
        return self.t0 + 0.5 * self.dt * np.arange(2 * self.n_steps + 1)

    def record_times(self, every: int) -> np.ndarray:
        return self.t0 + self.dt * np.arange(0, self.n_steps + 1, every)


def _grid(d: DriveSpec, cfg: IntegratorConfig) -> _Grid:
    dt = cfg.step(d)
    span = d.t_final - d.t_start
    n = max(1, math.ceil(span / dt - 1e-9))
    return _Grid(d.t_start, span / n, n)


def _record_every(grid: _Grid, dt_output: float | None) -> int:
    if dt_output is None:
        return grid.n_steps
    return max(1, int(round(dt_output / grid.dt)))


# ---------------------------------------------------------------- frames


def _label_perturbed(frame: EigenFrame, vecs: np.ndarray) -> np.ndarray:
    """Order/phase perturbed eigenvectors (R, 4, 4) to follow the bare labels."""
    ov = np.abs(la.dagger(frame.basis)[None] @ vecs) ** 2  # [r, bare k, perturbed m]
    perm = np.argmax(ov, axis=2)
    out = np.empty_like(vecs)
    for r in range(vecs.shape[0]):
        p = perm[r]
        if len(set(p.tolist())) != 4:
            _, p = linear_sum_assignment(-ov[r])
        out[r] = vecs[r][:, p]
    lead = np.einsum("ak,rak->rk", frame.basis.conj(), out)
    return out * (np.abs(lead) / np.where(lead == 0, 1, lead))[:, None, :]


def _resonance_masks(frame: EigenFrame, d: DriveSpec) -> tuple[np.ndarray, np.ndarray]:
    gaps = np.abs(frame.energies[:, None] - frame.energies[None, :])
    tol = RESONANCE_TOL * max(1.0, gaps.max())
    pump = np.abs(gaps - d.omega_20) < tol
    stokes = np.abs(gaps - d.omega_12) < tol
    return pump, stokes


@dataclass
class _RotatingSetup:
    basis: np.ndarray  # (R, 4, 4) perturbed eigenvectors in product basis
    ops: np.ndarray  # (R, 3, 4, 4): detuning, pump coupling, Stokes coupling
    theta: np.ndarray  # (4,) bare energies defining the frame


def _rotating_setup(p: SystemParams, frame: EigenFrame, d: DriveSpec, deltas: np.ndarray) -> _RotatingSetup:
    h0 = build_h_sys(p)[None] - 0.5 * deltas[:, 0, None, None] * Z1 - 0.5 * deltas[:, 1, None, None] * Z2
    vals, vecs = np.linalg.eigh(h0)
    vecs = _label_perturbed(frame, vecs)
    energies = np.real(np.einsum("rak,rab,rbk->rk", vecs.conj(), h0, vecs))
    x = la.dagger(vecs) @ DRIVE_OP @ vecs
    pump_mask, stokes_mask = _resonance_masks(frame, d)
    n = deltas.shape[0]
    ops = np.zeros((n, 3, 4, 4), dtype=complex)
    ops[:, 0] = np.einsum("rk,kl->rkl", energies - frame.energies, np.eye(4))
    ops[:, 1] = 0.5 * x * pump_mask
    ops[:, 2] = 0.5 * x * stokes_mask
    return _RotatingSetup(vecs, ops, frame.energies.copy())


def _rotating_coefs(d: DriveSpec, grid: _Grid) -> np.ndarray:
    t = grid.half_times
    return np.vstack([np.ones_like(t), envelope(d.pump, t), envelope(d.stokes, t)]).astype(complex)


def _lab_coefs(d: DriveSpec, grid: _Grid) -> np.ndarray:
    t = np.clip(grid.half_times, d.t_start, d.t_final)
    return np.vstack([np.ones_like(t), drive_value(d, t)]).astype(complex)


def _frequency_components(op_eig: np.ndarray, energies: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split ``e^{iEt} op e^{-iEt}`` into fixed-frequency parts: (freqs, ops)."""
    freq = energies[:, None] - energies[None, :]
    keys = np.round(freq, 9)
    mask = np.abs(op_eig) > 1e-14
    comps, ops = [], []
    for f in sorted(set(keys[mask].tolist())):
        sel = mask & (keys == f)
        comps.append(float(freq[sel][0]))
        ops.append(np.where(sel, op_eig, 0))
    if not ops:
        return np.zeros(1), np.zeros((1, 4, 4), dtype=complex)
    return np.array(comps), np.array(ops, dtype=complex)


# ---------------------------------------------------------------- helpers


def _initial_rotating(frame: EigenFrame, basis: np.ndarray) -> np.ndarray:
    return la.dagger(basis) @ frame.basis[:, 0]


def _to_product(basis: np.ndarray, theta: np.ndarray, t: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Rotating-frame amplitudes (R, T, 4) -> product-basis amplitudes."""
    phases = np.exp(-1j * t[:, None] * theta[None, :])  # (T, 4)
    return np.einsum("rak,rtk->rta", basis, states * phases[None])


def _prob(z):
    """|z|^2 as re^2 + im^2: correctly rounded, so independent of array layout."""
    return z.real * z.real + z.imag * z.imag


def _check_norms(psi: np.ndarray):
    drift = np.abs(np.linalg.norm(psi, axis=-1) - 1).max()
    if drift > NORM_TOL:
        raise NormDrift("state norm drifted by %.3g" % drift)


def _result_from_psi(frame: EigenFrame, psi_t: np.ndarray, times, traced: bool) -> RunResult:
    """psi_t: (T, 4) product-basis amplitudes of one realization."""
    psi_f = psi_t[-1]
    rho = la.projector(psi_f)
    pops = _prob(la.dagger(frame.basis) @ psi_f)
    res = RunResult(rho, pops, float(np.clip(_prob(psi_f[la.EE]), 0, 1)))
    if traced:
        res.times = times
        res.population_trace = _prob(psi_t @ frame.basis.conj())
        res.xi_trace = _prob(psi_t[:, la.EE])
    return res


def _result_from_rho(frame: EigenFrame, rho_t: np.ndarray, times, traced: bool) -> RunResult:
    rho_f = rho_t[-1]
    pops = np.real(np.diag(la.dagger(frame.basis) @ rho_f @ frame.basis))
    res = RunResult(rho_f, pops, float(np.clip(rho_f[la.EE, la.EE].real, 0, 1)))
    if traced:
        vb = frame.basis
        res.times = times
        res.population_trace = np.real(np.einsum("ak,tab,bk->tk", vb.conj(), rho_t, vb))
        res.xi_trace = rho_t[:, la.EE, la.EE].real
    return res


_NO_KICK = (np.zeros((0, 0)), np.zeros((0, 4, 4), dtype=complex))


# ---------------------------------------------------------------- quasistatic


def evolve_quasistatic_batch(p: SystemParams, d: DriveSpec, deltas, cfg: IntegratorConfig = IntegratorConfig(),
                             dt_output: float | None = None, frame: EigenFrame | None = None):
    """Product-basis amplitudes (R, T, 4) for frozen noise draws ``deltas`` (R, 2).

    Returns ``(times, states)``; with ``dt_output=None`` only the initial and
    final states are recorded.
    """
    frame = build_eigenframe(p) if frame is None else frame
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    grid = _grid(d, cfg)
    every = _record_every(grid, dt_output)
    times = grid.record_times(every)
    n = deltas.shape[0]
    kick = np.zeros((n, 0))
    if cfg.backend == "rotating_rwa":
        setup = _rotating_setup(p, frame, d, deltas)
        coefs = _rotating_coefs(d, grid)
        psi0 = _initial_rotating(frame, setup.basis)
        states = schrodinger_rk4(setup.ops, coefs, kick, _NO_KICK[1], np.zeros((0, coefs.shape[1]), complex),
                                 psi0, grid.dt, grid.n_steps, every)
        states = _to_product(setup.basis, setup.theta, times, states)
    else:
        h0 = build_h_sys(p)[None] - 0.5 * deltas[:, 0, None, None] * Z1 - 0.5 * deltas[:, 1, None, None] * Z2
        ops = np.stack([h0, np.broadcast_to(DRIVE_OP, h0.shape)], axis=1).astype(complex)
        coefs = _lab_coefs(d, grid)
        psi0 = np.broadcast_to(frame.basis[:, 0], (n, 4)).astype(complex)
        states = schrodinger_rk4(ops, coefs, kick, _NO_KICK[1], np.zeros((0, coefs.shape[1]), complex),
                                 psi0, grid.dt, grid.n_steps, every)
    _check_norms(states[:, -1])
    return times, states


def propagate_quasistatic(p: SystemParams, d: DriveSpec, r: QuasistaticDraw,
                          cfg: IntegratorConfig = IntegratorConfig(), dt_output: float | None = None) -> RunResult:
    frame = build_eigenframe(p)
    times, states = evolve_quasistatic_batch(p, d, [[r.delta1, r.delta2]], cfg, dt_output, frame)
    return _result_from_psi(frame, states[0], times, dt_output is not None)


# ---------------------------------------------------------------- Markovian


def _markov_operators(p: SystemParams, frame: EigenFrame, d: DriveSpec, sign: int, grid: _Grid,
                      backend: str):
    """(H ops (1, J, 4, 4), H coefs, jump ops (K, 4, 4), jump coefs, frame basis)."""
    a_prod, _ = build_dissipator(MarkovSpec(0.0, sign))
    if backend == "rotating_rwa":
        setup = _rotating_setup(p, frame, d, np.zeros((1, 2)))
        ops, coefs = setup.ops, _rotating_coefs(d, grid)
        freqs, a_ops = _frequency_components(frame.to_eigen(a_prod), frame.energies)
        a_coefs = np.exp(1j * freqs[:, None] * grid.half_times[None, :])
        return ops, coefs, a_ops, a_coefs, setup.basis[0]
    ops = np.stack([build_h_sys(p), DRIVE_OP])[None].astype(complex)
    coefs = _lab_coefs(d, grid)
    a_coefs = np.ones((1, 2 * grid.n_steps + 1), dtype=complex)
    return ops, coefs, a_prod[None].astype(complex), a_coefs, np.eye(4, dtype=complex)


def _rho_to_product(basis, theta, times, rho_t):
    if theta is None:
        return rho_t
    ph = np.exp(-1j * times[:, None] * theta[None, :])  # (T, 4)
    rho_t = ph[..., :, None] * rho_t * ph.conj()[..., None, :]
    return np.einsum("ak,...kl,bl->...ab", basis, rho_t, basis.conj())


def _check_density(rho: np.ndarray):
    herm = 0.5 * (rho + la.dagger(rho))
    if abs(np.trace(rho) - 1) > 1e-8:
        raise PositivityLoss("trace drifted to %.12g" % np.trace(rho).real)
    lam = np.linalg.eigvalsh(herm).min()
    if lam < -POSITIVITY_TOL:
        raise PositivityLoss("density matrix eigenvalue %.3g" % lam)


def evolve_lindblad_batch(p: SystemParams, d: DriveSpec, sign: int, gammas, cfg: IntegratorConfig = IntegratorConfig(),
                          dt_output: float | None = None, frame: EigenFrame | None = None,
                          rho0: np.ndarray | None = None):
    """Product-basis density matrices (R, T, 4, 4), one per rate in ``gammas``.

    ``rho0`` (product basis) defaults to the bare ground state.
    """
    frame = build_eigenframe(p) if frame is None else frame
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    grid = _grid(d, cfg)
    every = _record_every(grid, dt_output)
    times = grid.record_times(every)
    ops, coefs, a_ops, a_coefs, basis = _markov_operators(p, frame, d, sign, grid, cfg.backend)
    theta = frame.energies if cfg.backend == "rotating_rwa" else None
    if rho0 is None:
        rho0 = la.projector(frame.basis[:, 0])
    rho_start = la.dagger(basis) @ rho0 @ basis
    n = gammas.size
    out = lindblad_rk4(np.broadcast_to(ops, (n,) + ops.shape[1:]).copy(), coefs, a_ops, a_coefs, gammas,
                       np.broadcast_to(rho_start, (n, 4, 4)).copy(), grid.dt, grid.n_steps, every)
    out = _rho_to_product(basis, theta, times, out)
    for rho in out[:, -1]:
        _check_density(rho)
    return times, out


def propagate_lindblad(p: SystemParams, d: DriveSpec, spec: MarkovSpec, cfg: IntegratorConfig = IntegratorConfig(),
                       dt_output: float | None = None, rho0: np.ndarray | None = None) -> RunResult:
    frame = build_eigenframe(p)
    times, out = evolve_lindblad_batch(p, d, spec.sign, [spec.gamma], cfg, dt_output, frame, rho0)
    return _result_from_rho(frame, out[0], times, dt_output is not None)


def propagate_trajectories(p: SystemParams, d: DriveSpec, spec: MarkovSpec, m: int,
                           cfg: IntegratorConfig = IntegratorConfig(), rng: np.random.Generator | int = 0,
                           psi0: np.ndarray | None = None) -> RunResult:
    """Average of ``m`` pure-state trajectories under white Hamiltonian noise.

    Each step carries a constant kick ``-delta_n * A`` with
    ``delta_n = sqrt(gamma/dt) * N(0, 1)``; the ensemble average converges to
    :func:`propagate_lindblad` as ``m`` grows.
    """
    if m < 1:
        raise ValueError("need at least one trajectory")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if cfg.dt is None and cfg.backend == "rotating_rwa":
        dt = min(TRAJECTORY_DT, TRAJECTORY_KICK ** 2 / spec.gamma) if spec.gamma > 0 else TRAJECTORY_DT
        cfg = dataclasses.replace(cfg, dt=dt)
    frame = build_eigenframe(p)
    grid = _grid(d, cfg)
    ops, coefs, a_ops, a_coefs, basis = _markov_operators(p, frame, d, spec.sign, grid, cfg.backend)
    theta = frame.energies if cfg.backend == "rotating_rwa" else None
    start = frame.basis[:, 0] if psi0 is None else np.asarray(psi0, dtype=complex)
    start = la.dagger(basis) @ start
    kick = -math.sqrt(spec.gamma / grid.dt) * rng.standard_normal((m, grid.n_steps))
    states = schrodinger_rk4(np.broadcast_to(ops, (m,) + ops.shape[1:]).copy(), coefs, kick, a_ops, a_coefs,
                             np.broadcast_to(start, (m, 4)).copy(), grid.dt, grid.n_steps, grid.n_steps)
    psi_f = states[:, -1]
    _check_norms(psi_f)
    rho = np.einsum("ra,rb->ab", psi_f, psi_f.conj()) / m
    rho = _rho_to_product(basis, theta, np.array([grid.t0 + grid.dt * grid.n_steps]), rho[None])[0]
    return _result_from_rho(frame, rho[None], None, False)


# ---------------------------------------------------------------- Monte Carlo


def _xi_chunk(args):
    p, d, cfg, deltas = args
    _, states = evolve_quasistatic_batch(p, d, deltas, cfg)
    return _prob(states[:, -1, la.EE])


def _summarize(xs: np.ndarray) -> tuple[float, float]:
    if xs.size == 1 or np.all(xs == xs[0]):
        return float(xs[0]), 0.0
    mean = math.fsum(xs) / xs.size
    var = math.fsum((xs - mean) ** 2) / (xs.size - 1)
    return mean, math.sqrt(var / xs.size)


def quasistatic_xi_samples(p: SystemParams, d: DriveSpec, spec: QuasistaticSpec, mc: MonteCarloConfig,
                           cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Per-realization efficiencies, ordered by realization index."""
    deltas = sample_quasistatic_batch(spec, mc.master_seed, mc.n_realizations)
    if not mc.parallel:
        return _xi_chunk((p, d, cfg, deltas))
    chunks = [deltas[i:i + mc.chunk] for i in range(0, len(deltas), mc.chunk)]
    with ProcessPoolExecutor(max_workers=mc.workers) as ex:
        parts = list(ex.map(_xi_chunk, [(p, d, cfg, c) for c in chunks]))
    return np.concatenate(parts)


def monte_carlo_xi(p: SystemParams, d: DriveSpec, spec: QuasistaticSpec | MarkovSpec,
                   mc: MonteCarloConfig = MonteCarloConfig(),
                   cfg: IntegratorConfig = IntegratorConfig()) -> tuple[float, float]:
    """Ensemble-averaged ``<ee|rho_f|ee>`` and its standard error.

    Markovian specs use the deterministic master equation (stderr 0).
    """
    if isinstance(spec, MarkovSpec):
        return propagate_lindblad(p, d, spec, cfg).xi_r, 0.0
    return _summarize(quasistatic_xi_samples(p, d, spec, mc, cfg))
