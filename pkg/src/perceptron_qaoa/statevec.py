"""Exact state-vector engine: plus-state preparation, diagonal-phase and
transverse-field layers, full protocol evolution, variational energies and
reverse-mode exact gradients.

Sign conventions: the mixer Hamiltonian is H_x = -gamma0 * sum_j X_j, so
exp(-i beta H_x) = prod_j exp(+i beta gamma0 X_j); the phase layer applies
exp(-i gamma H_z) with H_z the (diagonal) energy table. hbar = 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .instance import MAX_SPINS, _check_spins


@dataclass(frozen=True)
class MixerConfig:
    """Transverse-field strength gamma0 (> 0); gamma0 = 1 puts the
    single-spin-flip gap of the mixer at 2."""

    gamma0: float = 1.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")


@dataclass(eq=False)
class StateVector:
    n_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_spins,):
            raise ValueError("amplitude count must be 2^n_spins")

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def copy(self):
        return StateVector(self.n_spins, self.amplitudes.copy())


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    energy_density: float
    ground_overlap: float


def plus_state(n_spins, max_spins=MAX_SPINS):
    """|+>^N: every amplitude 2^(-N/2)."""
    _check_spins(n_spins, max_spins)
    amp = np.full(1 << n_spins, 2.0 ** (-n_spins / 2), dtype=np.complex128)
    return StateVector(n_spins, amp)


def _check_match(state, table):
    if state.n_spins != table.n_spins:
        raise ValueError(f"state has {state.n_spins} spins, table {table.n_spins}")


def apply_diagonal_phase(state, table, gamma):
    """amplitude[c] *= exp(-i * gamma * values[c]); in place, returns state."""
    _check_match(state, table)
    basis = table.phase_basis()
    if basis is not None:
        levels, idx = basis
        kernels.phase_mult(state.amplitudes, idx, np.exp(-1j * gamma * levels))
    else:
        kernels.phase_mult_direct(state.amplitudes, table.values, gamma)
    return state


def apply_mixer(state, beta, cfg):
    """Apply prod_j exp(+i * beta * gamma0 * X_j); in place, returns state."""
    theta = beta * cfg.gamma0
    kernels.rotate_x_all(state.amplitudes, state.n_spins, math.cos(theta),
                         math.sin(theta))
    return state


def evolve(params, table, cfg):
    """Run the full P-step protocol on a fresh plus state: for each step,
    the diagonal phase gamma_m, then the mixer beta_m."""
    state = plus_state(table.n_spins)
    for m in range(params.p):
        apply_diagonal_phase(state, table, params.gammas[m])
        apply_mixer(state, params.betas[m], cfg)
    return state


def expectation(state, table):
    """Energy, energy density, and probability mass on zero-energy configs."""
    _check_match(state, table)
    a = state.amplitudes
    prob = a.real * a.real + a.imag * a.imag
    energy = float(prob @ table.values)
    ground = float(prob[table.solution_mask()].sum())
    return EnergyReport(energy, energy / table.n_spins, ground)


def energy_and_gradient(params, table, cfg):
    """(E, dE/d(beta_1..P, gamma_1..P)) by one forward and one backward
    sweep (reversible-adjoint scheme, two registers of memory).

    The costate lambda = H_z|psi_P> is pulled back through the inverse
    layers together with the state; each mixer undo accumulates
    sum_j <lambda|X_j|psi> in the same pass, each phase undo accumulates
    <lambda|H_z|psi>.
    """
    p = params.p
    state = evolve(params, table, cfg)
    report = expectation(state, table)
    psi = state.amplitudes
    lam = psi * table.values
    grad_beta = np.empty(p)
    grad_gamma = np.empty(p)
    partials = np.empty(kernels.accum_slots(table.n_spins), dtype=np.float64)
    basis = table.phase_basis()
    nchunks = min(256, psi.size)
    phase_partials = np.empty(nchunks, dtype=np.float64)
    for m in range(p - 1, -1, -1):
        theta = params.betas[m] * cfg.gamma0
        kernels.rotate_x_all_accum(psi, lam, table.n_spins, math.cos(theta),
                                   -math.sin(theta), partials)
        # dE/dbeta = 2 Im <lam|H_x|psi> with H_x = -gamma0 sum_j X_j
        grad_beta[m] = -2.0 * cfg.gamma0 * float(np.sum(partials))
        gamma = params.gammas[m]
        if basis is not None:
            levels, idx = basis
            kernels.phase_pair_accum(psi, lam, table.values, idx,
                                     np.exp(+1j * gamma * levels), phase_partials)
            inner_im = float(np.sum(phase_partials))
        else:
            phases = np.exp(+1j * gamma * table.values)
            psi *= phases
            lam *= phases
            inner_im = float(np.vdot(lam, table.values * psi).imag)
        grad_gamma[m] = 2.0 * inner_im
    return report.energy, np.concatenate([grad_beta, grad_gamma])


def gradient(params, table, cfg):
    """Exact dE/d(beta_1..P, gamma_1..P); see energy_and_gradient."""
    return energy_and_gradient(params, table, cfg)[1]
