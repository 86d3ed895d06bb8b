"""Compiled fixed-step RK4 integrators for batches of small quantum systems.

Hamiltonians are linear combinations ``H_r(t) = sum_j c_j(t) ops[r, j]``
(+ an optional piecewise-constant stochastic term). Coefficients are sampled
on the half-step grid ``t0 + k*dt/2``, ``k = 0 .. 2*n_steps``, so RK4 only
needs index lookups.

Each realization is integrated independently in a fixed operation order, so
results for realization ``r`` do not depend on batch size or composition.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _build_h(ops_r, coefs, idx, kick_val, kick_ops, kick_coefs, out):
    d = out.shape[0]
    nj = ops_r.shape[0]
    nk = kick_ops.shape[0]
    for a in range(d):
        for b in range(d):
            s = 0j
            for j in range(nj):
                s += coefs[j, idx] * ops_r[j, a, b]
            if kick_val != 0.0:
                for k in range(nk):
                    s += kick_val * kick_coefs[k, idx] * kick_ops[k, a, b]
            out[a, b] = s


@njit(cache=True)
def _matvec_mi(h, v, out):
    # out = -i * h @ v
    d = v.shape[0]
    for a in range(d):
        s = 0j
        for b in range(d):
            s += h[a, b] * v[b]
        out[a] = -1j * s


@njit(cache=True)
def schrodinger_rk4(ops, coefs, kick, kick_ops, kick_coefs, psi0, dt, n_steps, record_every):
    """Integrate ``i dpsi/dt = H(t) psi`` for every realization.

    ops: (R, J, d, d); coefs: (J, 2n+1); kick: (R, n) or (R, 0);
    kick_ops: (K, d, d); kick_coefs: (K, 2n+1); psi0: (R, d).
    Returns states at steps 0, record_every, ... : (R, n_steps//record_every + 1, d).
    """
    n_r = psi0.shape[0]
    d = psi0.shape[1]
    n_rec = n_steps // record_every + 1
    out = np.empty((n_r, n_rec, d), dtype=np.complex128)
    has_kick = kick.shape[1] > 0
    h0 = np.empty((d, d), dtype=np.complex128)
    hm = np.empty((d, d), dtype=np.complex128)
    h1 = np.empty((d, d), dtype=np.complex128)
    k1 = np.empty(d, dtype=np.complex128)
    k2 = np.empty(d, dtype=np.complex128)
    k3 = np.empty(d, dtype=np.complex128)
    k4 = np.empty(d, dtype=np.complex128)
    tmp = np.empty(d, dtype=np.complex128)
    half = 0.5 * dt
    sixth = dt / 6.0
    for r in range(n_r):
        psi = psi0[r].copy()
        out[r, 0] = psi
        rec = 1
        kv = kick[r, 0] if has_kick else 0.0
        _build_h(ops[r], coefs, 0, kv, kick_ops, kick_coefs, h0)
        for i in range(n_steps):
            kv = kick[r, i] if has_kick else 0.0
            if has_kick and i > 0:
                # the stochastic term jumps at step boundaries
                _build_h(ops[r], coefs, 2 * i, kv, kick_ops, kick_coefs, h0)
            _build_h(ops[r], coefs, 2 * i + 1, kv, kick_ops, kick_coefs, hm)
            _build_h(ops[r], coefs, 2 * i + 2, kv, kick_ops, kick_coefs, h1)
            _matvec_mi(h0, psi, k1)
            for a in range(d):
                tmp[a] = psi[a] + half * k1[a]
            _matvec_mi(hm, tmp, k2)
            for a in range(d):
                tmp[a] = psi[a] + half * k2[a]
            _matvec_mi(hm, tmp, k3)
            for a in range(d):
                tmp[a] = psi[a] + dt * k3[a]
            _matvec_mi(h1, tmp, k4)
            for a in range(d):
                psi[a] = psi[a] + sixth * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
            h0, h1 = h1, h0
            if (i + 1) % record_every == 0:
                out[r, rec] = psi
                rec += 1
    return out


@njit(cache=True)
def _lindblad_rhs(h, a, ada, gamma, rho, out):
    d = rho.shape[0]
    for i in range(d):
        for j in range(d):
            comm = 0j
            jump = 0j
            anti = 0j
            for k in range(d):
                comm += h[i, k] * rho[k, j] - rho[i, k] * h[k, j]
                anti += ada[i, k] * rho[k, j] + rho[i, k] * ada[k, j]
                # (A rho A^dag)_ij
                s = 0j
                for m in range(d):
                    s += rho[k, m] * np.conj(a[j, m])
                jump += a[i, k] * s
            out[i, j] = -1j * comm + gamma * (jump - 0.5 * anti)


@njit(cache=True)
def _build_a(diss_ops, diss_coefs, idx, a, ada):
    d = a.shape[0]
    for i in range(d):
        for j in range(d):
            s = 0j
            for k in range(diss_ops.shape[0]):
                s += diss_coefs[k, idx] * diss_ops[k, i, j]
            a[i, j] = s
    for i in range(d):
        for j in range(d):
            s = 0j
            for k in range(d):
                s += np.conj(a[k, i]) * a[k, j]
            ada[i, j] = s


@njit(cache=True)
def lindblad_rk4(ops, coefs, diss_ops, diss_coefs, gammas, rho0, dt, n_steps, record_every):
    """Integrate ``drho/dt = -i[H, rho] + gamma (A rho A^+ - {A^+A, rho}/2)``.

    ``A(t) = sum_k diss_coefs[k, t] diss_ops[k]``; shapes as in
    :func:`schrodinger_rk4`, rho0: (R, d, d), gammas: (R,).
    """
    n_r = rho0.shape[0]
    d = rho0.shape[1]
    n_rec = n_steps // record_every + 1
    out = np.empty((n_r, n_rec, d, d), dtype=np.complex128)
    empty_ops = np.zeros((0, d, d), dtype=np.complex128)
    empty_coefs = np.zeros((0, coefs.shape[1]), dtype=np.complex128)
    h0 = np.empty((d, d), dtype=np.complex128)
    hm = np.empty((d, d), dtype=np.complex128)
    h1 = np.empty((d, d), dtype=np.complex128)
    a0 = np.empty((d, d), dtype=np.complex128)
    am = np.empty((d, d), dtype=np.complex128)
    a1 = np.empty((d, d), dtype=np.complex128)
    ada0 = np.empty((d, d), dtype=np.complex128)
    adam = np.empty((d, d), dtype=np.complex128)
    ada1 = np.empty((d, d), dtype=np.complex128)
    k1 = np.empty((d, d), dtype=np.complex128)
    k2 = np.empty((d, d), dtype=np.complex128)
    k3 = np.empty((d, d), dtype=np.complex128)
    k4 = np.empty((d, d), dtype=np.complex128)
    tmp = np.empty((d, d), dtype=np.complex128)
    half = 0.5 * dt
    sixth = dt / 6.0
    for r in range(n_r):
        rho = rho0[r].copy()
        g = gammas[r]
        out[r, 0] = rho
        rec = 1
        _build_h(ops[r], coefs, 0, 0.0, empty_ops, empty_coefs, h0)
        _build_a(diss_ops, diss_coefs, 0, a0, ada0)
        for i in range(n_steps):
            _build_h(ops[r], coefs, 2 * i + 1, 0.0, empty_ops, empty_coefs, hm)
            _build_h(ops[r], coefs, 2 * i + 2, 0.0, empty_ops, empty_coefs, h1)
            _build_a(diss_ops, diss_coefs, 2 * i + 1, am, adam)
            _build_a(diss_ops, diss_coefs, 2 * i + 2, a1, ada1)
            _lindblad_rhs(h0, a0, ada0, g, rho, k1)
            for x in range(d):
                for y in range(d):
                    tmp[x, y] = rho[x, y] + half * k1[x, y]
            _lindblad_rhs(hm, am, adam, g, tmp, k2)
            for x in range(d):
                for y in range(d):
                    tmp[x, y] = rho[x, y] + half * k2[x, y]
            _lindblad_rhs(hm, am, adam, g, tmp, k3)
            for x in range(d):
                for y in range(d):
                    tmp[x, y] = rho[x, y] + dt * k3[x, y]
            _lindblad_rhs(h1, a1, ada1, g, tmp, k4)
            for x in range(d):
                for y in range(d):
                    rho[x, y] = rho[x, y] + sixth * (k1[x, y] + 2.0 * k2[x, y] + 2.0 * k3[x, y] + k4[x, y])
            h0, h1 = h1, h0
            a0, a1 = a1, a0
            ada0, ada1 = ada1, ada0
            if (i + 1) % record_every == 0:
                out[r, rec] = rho
                rec += 1
    return out
