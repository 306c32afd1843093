"""Numba kernels for the hot loops of the exact simulator.

Basis convention (shared by every module): bit j of a basis-state integer
encodes spin j, with bit value 0 <-> sigma_j = +1 and bit 1 <-> sigma_j = -1.

All register-sized kernels mutate their array arguments in place. Kernels
that need a global reduction write per-chunk partial sums instead, so the
caller can finish with a fixed-order ``np.sum`` regardless of thread count.
"""

import numpy as np
from numba import njit, prange

# 2^BLOCK_QUBITS complex128 = 32 KiB: one cache-resident block for the
# low-qubit butterfly stage.
BLOCK_QUBITS = 11
# Column-panel width (complex elements) for the high-qubit stage.
PANEL_WIDTH = 64


@njit(cache=True, parallel=True)
def rotate_x_all(a, n_spins, cos_t, sin_t):
    """Apply prod_j exp(i*theta*X_j) to the register, theta = atan2(sin_t, cos_t).

    Per qubit the 2x2 rotation is [[c, i s], [i s, c]]. Stage A sweeps the
    low qubits inside contiguous cache blocks, stage B the high qubits via
    cache-resident column panels.
    """
    kk = min(BLOCK_QUBITS, n_spins)
    bs = 1 << kk
    nblocks = (1 << n_spins) >> kk
    for b in prange(nblocks):
        base = b << kk
        for j in range(kk):
            stride = 1 << j
            step = stride << 1
            for g in range(base, base + bs, step):
                for i in range(g, g + stride):
                    lo = a[i]
                    hi = a[i + stride]
                    lr = lo.real
                    li = lo.imag
                    hr = hi.real
                    hm = hi.imag
                    a[i] = complex(cos_t * lr - sin_t * hm, cos_t * li + sin_t * hr)
                    a[i + stride] = complex(cos_t * hr - sin_t * li, cos_t * hm + sin_t * lr)
    h = n_spins - kk
    if h > 0:
        rows = 1 << h
        w = PANEL_WIDTH
        npanels = bs // w
        for p in prange(npanels):
            panel = np.empty((rows, w), dtype=np.complex128)
            col0 = p * w
            for r in range(rows):
                src = r * bs + col0
                for q in range(w):
                    panel[r, q] = a[src + q]
            for j in range(h):
                stride = 1 << j
                step = stride << 1
                for g in range(0, rows, step):
                    for i in range(g, g + stride):
                        for q in range(w):
                            lo = panel[i, q]
                            hi = panel[i + stride, q]
                            lr = lo.real
                            li = lo.imag
                            hr = hi.real
                            hm = hi.imag
                            panel[i, q] = complex(cos_t * lr - sin_t * hm,
                                                  cos_t * li + sin_t * hr)
                            panel[i + stride, q] = complex(cos_t * hr - sin_t * li,
                                                           cos_t * hm + sin_t * lr)
            for r in range(rows):
                dst = r * bs + col0
                for q in range(w):
                    a[dst + q] = panel[r, q]


@njit(cache=True, parallel=True)
def rotate_x_all_accum(psi, lam, n_spins, cos_t, sin_t, partials):
    """Rotate psi and lam by prod_j exp(i*theta*X_j) while accumulating
    Im sum_j <lam|X_j|psi> (only the imaginary part feeds the gradient).

    Each qubit's term is accumulated from the pre-rotation pair values of
    that qubit's sweep; because the single-qubit rotations commute with
    every X_j and act on both arrays, the mid-sweep accumulation equals the
    inner product taken on the untouched states. ``partials`` (float64)
    must have one slot per stage-A block plus one per stage-B panel.
    """
    kk = min(BLOCK_QUBITS, n_spins)
    bs = 1 << kk
    nblocks = (1 << n_spins) >> kk
    for b in prange(nblocks):
        base = b << kk
        acc = 0.0
        for j in range(kk):
            stride = 1 << j
            step = stride << 1
            for g in range(base, base + bs, step):
                for i in range(g, g + stride):
                    plo = psi[i]
                    phi = psi[i + stride]
                    llo = lam[i]
                    lhi = lam[i + stride]
                    acc += (llo.real * phi.imag - llo.imag * phi.real
                            + lhi.real * plo.imag - lhi.imag * plo.real)
                    psi[i] = complex(cos_t * plo.real - sin_t * phi.imag,
                                     cos_t * plo.imag + sin_t * phi.real)
                    psi[i + stride] = complex(cos_t * phi.real - sin_t * plo.imag,
                                              cos_t * phi.imag + sin_t * plo.real)
                    lam[i] = complex(cos_t * llo.real - sin_t * lhi.imag,
                                     cos_t * llo.imag + sin_t * lhi.real)
                    lam[i + stride] = complex(cos_t * lhi.real - sin_t * llo.imag,
                                              cos_t * lhi.imag + sin_t * llo.real)
        partials[b] = acc
    h = n_spins - kk
    if h > 0:
        rows = 1 << h
        w = PANEL_WIDTH
        npanels = bs // w
        for p in prange(npanels):
            ppanel = np.empty((rows, w), dtype=np.complex128)
            lpanel = np.empty((rows, w), dtype=np.complex128)
            col0 = p * w
            for r in range(rows):
                src = r * bs + col0
                for q in range(w):
                    ppanel[r, q] = psi[src + q]
                    lpanel[r, q] = lam[src + q]
            acc = 0.0
            for j in range(h):
                stride = 1 << j
                step = stride << 1
                for g in range(0, rows, step):
                    for i in range(g, g + stride):
                        for q in range(w):
                            plo = ppanel[i, q]
                            phi = ppanel[i + stride, q]
                            llo = lpanel[i, q]
                            lhi = lpanel[i + stride, q]
                            acc += (llo.real * phi.imag - llo.imag * phi.real
                                    + lhi.real * plo.imag - lhi.imag * plo.real)
                            ppanel[i, q] = complex(cos_t * plo.real - sin_t * phi.imag,
                                                   cos_t * plo.imag + sin_t * phi.real)
                            ppanel[i + stride, q] = complex(cos_t * phi.real - sin_t * plo.imag,
                                                            cos_t * phi.imag + sin_t * plo.real)
                            lpanel[i, q] = complex(cos_t * llo.real - sin_t * lhi.imag,
                                                   cos_t * llo.imag + sin_t * lhi.real)
                            lpanel[i + stride, q] = complex(cos_t * lhi.real - sin_t * llo.imag,
                                                            cos_t * lhi.imag + sin_t * llo.real)
            partials[nblocks + p] = acc
            for r in range(rows):
                dst = r * bs + col0
                for q in range(w):
                    psi[dst + q] = ppanel[r, q]
                    lam[dst + q] = lpanel[r, q]


def accum_slots(n_spins):
    """Number of partial-sum slots rotate_x_all_accum fills."""
    kk = min(BLOCK_QUBITS, n_spins)
    nblocks = (1 << n_spins) >> kk
    npanels = (1 << kk) // PANEL_WIDTH if n_spins > kk else 0
    return nblocks + npanels


@njit(cache=True, parallel=True)
def phase_mult(a, idx, phase_table):
    """a[i] *= phase_table[idx[i]] (diagonal unitary from a level table)."""
    for i in prange(a.size):
        a[i] = a[i] * phase_table[idx[i]]


@njit(cache=True, parallel=True)
def phase_mult_direct(a, values, gamma):
    """a[i] *= exp(-1j*gamma*values[i]) without a level table."""
    for i in prange(a.size):
        a[i] = a[i] * np.exp(-1j * gamma * values[i])


@njit(cache=True, parallel=True)
def phase_pair_accum(psi, lam, values, idx, phase_table, partials):
    """Multiply psi and lam by phase_table[idx[i]] and accumulate
    Im sum_i conj(lam_i) * values[i] * psi_i into per-chunk partials.

    The accumulated inner product is invariant under the simultaneous
    diagonal phase, so it equals Im <lam|diag(values)|psi> on the inputs.
    """
    nchunks = partials.size
    chunk = psi.size // nchunks
    for c in prange(nchunks):
        start = c * chunk
        stop = start + chunk
        acc = 0.0
        for i in range(start, stop):
            ph = phase_table[idx[i]]
            p = psi[i] * ph
            l = lam[i] * ph
            psi[i] = p
            lam[i] = l
            acc += values[i] * (l.real * p.imag - l.imag * p.real)
        partials[c] = acc


@njit(cache=True, parallel=True)
def ham_matvec(v, out, values, s, gamma0, n_spins):
    """out = s*diag(values) v - (1-s)*gamma0 * sum_j X_j v (real vectors)."""
    coef = (1.0 - s) * gamma0
    for i in prange(1 << n_spins):
        xacc = 0.0
        for j in range(n_spins):
            xacc += v[i ^ (1 << j)]
        out[i] = s * values[i] * v[i] - coef * xacc


@njit(cache=True, parallel=True)
def fill_energy_table(eff_patterns, nc, out):
    """Fill out[c] with the misclassification cost of every configuration.

    Walks each chunk in Gray-code order so one spin flip updates the M
    integer overlaps in O(M). Overlaps stay in integer units (sum of
    sigma*xi); for nc=1 the caller rescales by 1/sqrt(N) afterwards.
    """
    n_pat, n_spins = eff_patterns.shape
    dim = 1 << n_spins
    nchunks = 256 if dim >= 256 else 1
    chunk = dim // nchunks
    for c in prange(nchunks):
        start = c * chunk
        stop = start + chunk
        ov = np.empty(n_pat, dtype=np.int64)
        g = start ^ (start >> 1)
        for mu in range(n_pat):
            acc = 0
            for j in range(n_spins):
                sj = 1 - 2 * ((g >> j) & 1)
                acc += sj * eff_patterns[mu, j]
            ov[mu] = acc
        prev = g
        for t in range(start, stop):
            if t != start:
                g = t ^ (t >> 1)
                diff = g ^ prev
                j = 0
                while (diff >> j) & 1 == 0:
                    j += 1
                sj_old = 1 - 2 * ((prev >> j) & 1)
                xj = eff_patterns[:, j]
                for mu in range(n_pat):
                    ov[mu] -= 2 * sj_old * xj[mu]
                prev = g
            e = 0
            if nc == 0:
                for mu in range(n_pat):
                    if ov[mu] <= 0:
                        e += 1
            else:
                for mu in range(n_pat):
                    if ov[mu] <= 0:
                        e -= ov[mu]
            out[g] = e


@njit(cache=True)
def metropolis_run(values, n_spins, temps, uniforms, start_config):
    """Single-spin-flip Metropolis on the energy table.

    One sweep proposes flipping spins 0..N-1 in order; ``uniforms`` supplies
    the acceptance draws (n_sweeps*N of them). Returns the best-so-far
    config/energy, the best-so-far energy after each sweep, and the
    accepted-move count.
    """
    n_sweeps = temps.size
    c = start_config
    e = values[c]
    best_c = c
    best_e = e
    best_per_sweep = np.empty(n_sweeps, dtype=np.float64)
    n_accepted = 0
    u = 0
    for sweep in range(n_sweeps):
        t = temps[sweep]
        for j in range(n_spins):
            cand = c ^ (1 << j)
            de = values[cand] - e
            if de <= 0.0:
                accept = True
            elif t > 0.0:
                accept = uniforms[u] < np.exp(-de / t)
            else:
                accept = False
            u += 1
            if accept:
                c = cand
                e = values[cand]
                n_accepted += 1
                if e < best_e:
                    best_e = e
                    best_c = c
        best_per_sweep[sweep] = best_e
    return best_c, best_e, best_per_sweep, n_accepted


@njit(cache=True, parallel=True)
def sk_diagonal(couplings_flat, fields, out, n_spins):
    """out[c] = -h.s(c) + s(c)^T J s(c) for every configuration c.

    Gray-code walk keeping q_j = sum_{j'} J[j,j'] s_{j'} updated in O(N)
    per flip; couplings_flat is row-major J with zero diagonal.
    """
    dim = 1 << n_spins
    nchunks = 256 if dim >= 256 else 1
    chunk = dim // nchunks
    for c in prange(nchunks):
        start = c * chunk
        stop = start + chunk
        s = np.empty(n_spins, dtype=np.float64)
        g = start ^ (start >> 1)
        for j in range(n_spins):
            s[j] = 1.0 - 2.0 * ((g >> j) & 1)
        q = np.zeros(n_spins, dtype=np.float64)
        lin = 0.0
        quad = 0.0
        for j in range(n_spins):
            lin += fields[j] * s[j]
            acc = 0.0
            for jp in range(n_spins):
                acc += couplings_flat[j * n_spins + jp] * s[jp]
            q[j] = acc
            quad += s[j] * acc
        prev = g
        for t in range(start, stop):
            if t != start:
                g = t ^ (t >> 1)
                diff = g ^ prev
                j = 0
                while (diff >> j) & 1 == 0:
                    j += 1
                sj_old = s[j]
                quad -= 4.0 * sj_old * q[j]
                lin -= 2.0 * fields[j] * sj_old
                s[j] = -sj_old
                for jp in range(n_spins):
                    q[jp] -= 2.0 * sj_old * couplings_flat[jp * n_spins + j]
                prev = g
            out[g] = -lin + quad
