"""Independent reference implementations used to check the package.

Everything here is deliberately naive (explicit loops, dense matrices,
scipy.expm, finite differences) and shares nothing with the package's
computational paths beyond the documented basis convention: bit j of a
basis index is spin j, bit value 0 <-> sigma_j = +1.
"""

import math
from functools import reduce

import numpy as np
import scipy.linalg as sla

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def spins_of(config, n):
    return [1 - 2 * ((config >> j) & 1) for j in range(n)]


def naive_overlap_int(config, pattern, label, n):
    sigma = spins_of(config, n)
    return sum(sigma[j] * label * pattern[j] for j in range(n))


def naive_energy(config, patterns, labels, nc):
    """Cost via the direct definition, integer units scaled at the end."""
    m, n = len(patterns), len(patterns[0])
    total = 0
    for mu in range(m):
        ov = naive_overlap_int(config, patterns[mu], labels[mu], n)
        if ov <= 0:
            total += 1 if nc == 0 else -ov
    if nc == 0:
        return float(total)
    return float(total) * (1.0 / math.sqrt(n))


def naive_table(patterns, labels, nc):
    n = len(patterns[0])
    return np.array([naive_energy(c, patterns, labels, nc)
                     for c in range(1 << n)])


def op_on_qubit(op, j, n):
    """Dense operator acting as `op` on qubit j (bit j is the fast index)."""
    ops = [ID2] * n
    ops[j] = op
    return reduce(np.kron, ops[::-1])


def dense_hx(n, gamma0=1.0):
    return -gamma0 * sum(op_on_qubit(SX, j, n) for j in range(n))


def dense_h(s, values, n, gamma0=1.0):
    return s * np.diag(values.astype(complex)) + (1 - s) * dense_hx(n, gamma0)


def dense_mixer_layer(beta, n, gamma0=1.0):
    return sla.expm(-1j * beta * dense_hx(n, gamma0))


def dense_phase_layer(gamma, values):
    return np.diag(np.exp(-1j * gamma * values))


def dense_evolve(betas, gammas, values, n, gamma0=1.0):
    psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)
    for b, g in zip(betas, gammas):
        psi = dense_phase_layer(g, values) @ psi
        psi = dense_mixer_layer(b, n, gamma0) @ psi
    return psi


def dense_energy(betas, gammas, values, n, gamma0=1.0):
    psi = dense_evolve(betas, gammas, values, n, gamma0)
    return float(np.sum(np.abs(psi) ** 2 * values))


def fd_gradient(fun, x, step=1e-5):
    """Central finite differences of a scalar function."""
    g = np.empty(x.size)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (fun(xp) - fun(xm)) / (2 * step)
    return g
