"""Angle schedules: linear digitized-annealing ramps, the one-dimensional
step-size landscape, smoothing, resampling in P, and the effective
annealing coordinate s_m = gamma_m / (gamma_m + beta_m)."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ScheduleParams:
    """The 2P protocol angles: betas drive the mixer, gammas the phase."""

    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=np.float64)
        g = np.asarray(self.gammas, dtype=np.float64)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "gammas", g)
        if b.ndim != 1 or b.shape != g.shape or b.size < 1:
            raise ValueError("betas and gammas must be equal-length 1-d, P >= 1")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(g))):
            raise ValueError("angles must be finite")

    @property
    def p(self):
        return self.betas.size

    def to_vector(self):
        """Flat layout used by the optimizer: (beta_1..beta_P, gamma_1..gamma_P)."""
        return np.concatenate([self.betas, self.gammas])

    @classmethod
    def from_vector(cls, x):
        x = np.asarray(x, dtype=np.float64)
        if x.size % 2:
            raise ValueError("parameter vector length must be 2P")
        p = x.size // 2
        return cls(x[:p].copy(), x[p:].copy())


@dataclass(frozen=True)
class DqaConfig:
    """Linear-schedule digitized annealing: P steps of size dt."""

    n_steps: int
    dt: float

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def total_time(self):
        return self.n_steps * self.dt


def dqa_schedule(cfg):
    """beta_m = (1 - s_m) dt, gamma_m = s_m dt with s_m = m/P (hbar = 1)."""
    s = np.arange(1, cfg.n_steps + 1, dtype=np.float64) / cfg.n_steps
    return ScheduleParams((1.0 - s) * cfg.dt, s * cfg.dt)


@dataclass(frozen=True, eq=False)
class DtLandscape:
    dt_grid: np.ndarray
    energies: np.ndarray
    argmin_dt: float
    argmin_energy: float

    def __post_init__(self):
        if self.dt_grid.shape != self.energies.shape:
            raise ValueError("grid and energies must match")


_INVPHI = (math.sqrt(5) - 1) / 2


def _golden_section(f, a, b, rel_tol):
    """Golden-section minimizer on [a, b]; returns (x, f(x))."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(abs(a), abs(b), 1e-30):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def scan_dt(table, n_steps, dt_min=0.02, dt_max=3.0, n_points=60,
            mixer=None, refine=True, rel_tol=1e-4):
    """Sweep the variational energy density of the dt-parameterized linear
    schedule over a uniform grid, then golden-section refine around the
    grid argmin when it is interior."""
    from . import statevec

    if not 0 < dt_min < dt_max:
        raise ValueError("need 0 < dt_min < dt_max")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    if mixer is None:
        mixer = statevec.MixerConfig()

    def eps(dt):
        params = dqa_schedule(DqaConfig(n_steps, dt))
        state = statevec.evolve(params, table, mixer)
        return statevec.expectation(state, table).energy_density

    grid = np.linspace(dt_min, dt_max, n_points)
    energies = np.array([eps(dt) for dt in grid])
    i = int(np.argmin(energies))
    best_dt, best_e = float(grid[i]), float(energies[i])
    if refine and 0 < i < n_points - 1:
        x, fx = _golden_section(eps, float(grid[i - 1]), float(grid[i + 1]), rel_tol)
        if fx < best_e:
            best_dt, best_e = float(x), float(fx)
    return DtLandscape(grid, energies, best_dt, best_e)


def _moving_average(x, window):
    h = window // 2
    out = np.empty_like(x)
    for i in range(x.size):
        lo = max(0, i - h)
        hi = min(x.size, i + h + 1)
        out[i] = x[lo:hi].mean()
    return out


def smooth(params, window=3):
    """Centered moving average of betas and gammas, windows truncated at
    the sequence ends; window must be odd and at most P."""
    if window % 2 == 0 or window < 1:
        raise ValueError("window must be odd and positive")
    if window > params.p:
        raise ValueError("window exceeds schedule length")
    return ScheduleParams(_moving_average(params.betas, window),
                          _moving_average(params.gammas, window))


def _mtilde(p):
    return np.arange(p, dtype=np.float64) / (p - 1)


def interpolate(params, new_p):
    """Resample betas/gammas as piecewise-linear functions of
    mtilde = (m-1)/(P-1) at new_p uniform points; endpoints are preserved."""
    if params.p < 2 or new_p < 2:
        raise ValueError("interpolation needs P >= 2 on both sides")
    old = _mtilde(params.p)
    new = _mtilde(new_p)
    return ScheduleParams(np.interp(new, old, params.betas),
                          np.interp(new, old, params.gammas))


def effective_s(params):
    """s_m = gamma_m / (gamma_m + beta_m); the linear ramp m/P for a
    digitized-annealing schedule."""
    denom = params.gammas + params.betas
    if np.any(denom == 0.0):
        raise ZeroDivisionError("gamma_m + beta_m vanishes at some step")
    return params.gammas / denom


def save_schedule(params, path):
    """CSV `m,beta,gamma`, one row per step, repr round-trippable floats."""
    lines = ["m,beta,gamma"]
    for m in range(params.p):
        lines.append(f"{m + 1},{float(params.betas[m])!r},{float(params.gammas[m])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_schedule(path):
    with open(path) as fh:
        rows = fh.read().strip().splitlines()
    if rows[0] != "m,beta,gamma":
        raise ValueError("bad schedule header")
    betas, gammas = [], []
    for row in rows[1:]:
        _, b, g = row.split(",")
        betas.append(float(b))
        gammas.append(float(g))
    return ScheduleParams(np.array(betas), np.array(gammas))


def save_landscape(scape, path):
    lines = ["dt,energy_density"]
    for dt, e in zip(scape.dt_grid, scape.energies):
        lines.append(f"{float(dt)!r},{float(e)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_landscape(path):
    with open(path) as fh:
        rows = fh.read().strip().splitlines()
    if rows[0] != "dt,energy_density":
        raise ValueError("bad landscape header")
    grid, energies = [], []
    for row in rows[1:]:
        dt, e = row.split(",")
        grid.append(float(dt))
        energies.append(float(e))
    grid = np.array(grid)
    energies = np.array(energies)
    i = int(np.argmin(energies))
    return DtLandscape(grid, energies, float(grid[i]), float(energies[i]))
