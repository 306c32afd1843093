"""QAOA optimization pipelines: BFGS with exact adjoint gradients, the
first-shot optimization from the best linear schedule (qaoa1), the smoothed
or interpolated restart (qaoa2), and warm-started transfer of a smooth
protocol onto a different sample."""

import json
import os
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import statevec
from .schedules import (DqaConfig, ScheduleParams, dqa_schedule, interpolate,
                        scan_dt, smooth)


@dataclass(frozen=True)
class BfgsConfig:
    """Quasi-Newton settings; the line search enforces strong Wolfe
    conditions with parameters c1, c2."""

    grad_tol: float = 1e-8
    max_iters: int = 2000
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self):
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.grad_tol <= 0 or self.max_iters < 1:
            raise ValueError("grad_tol must be positive, max_iters >= 1")


@dataclass
class QaoaResult:
    params: ScheduleParams
    energy_density: float
    ground_overlap: float
    n_iters: int
    stage: str
    trace: np.ndarray  # rows (iter, energy_density, grad_norm)
    warning: str | None = None
    n_fev: int = 0
    wall_s: float = 0.0


def evaluate(params, table, mixer=None):
    """Re-evaluate a schedule on a table (energy report of the final state)."""
    mixer = mixer or statevec.MixerConfig()
    return statevec.expectation(statevec.evolve(params, table, mixer), table)


def make_objective(table, mixer=None):
    """Oracle x -> (energy density, gradient) over the flat (betas, gammas)
    vector, for the given table."""
    mixer = mixer or statevec.MixerConfig()
    n = table.n_spins

    def fun(x):
        params = ScheduleParams.from_vector(x)
        energy, grad = statevec.energy_and_gradient(params, table, mixer)
        return energy / n, grad / n

    return fun


def bfgs_minimize(fun, start, cfg=None, stage="qaoa1"):
    """Minimize fun(x) -> (value, gradient) from a ScheduleParams start.

    Stops when the gradient infinity-norm drops below grad_tol or at
    max_iters; a line-search failure is reported through ``warning`` with
    the best point reached so far.
    """
    cfg = cfg or BfgsConfig()
    started = time.perf_counter()
    x0 = start.to_vector()
    last = {}
    trace = []

    def wrapped(x):
        f, g = fun(np.asarray(x, dtype=np.float64))
        last["x"] = np.array(x, copy=True)
        last["f"] = f
        last["gnorm"] = float(np.max(np.abs(g)))
        wrapped.n_fev += 1
        if wrapped.n_fev == 1:
            trace.append((0, f, last["gnorm"]))
        return f, g

    wrapped.n_fev = 0

    def callback(xk):
        if last and np.array_equal(last["x"], xk):
            trace.append((len(trace), last["f"], last["gnorm"]))
        else:
            f, g = fun(xk)
            trace.append((len(trace), f, float(np.max(np.abs(g)))))

    res = minimize(wrapped, x0, jac=True, method="BFGS",
                   options={"gtol": cfg.grad_tol, "maxiter": cfg.max_iters,
                            "c1": cfg.c1, "c2": cfg.c2},
                   callback=callback)
    warning = None if res.status == 0 else str(res.message)
    return QaoaResult(
        params=ScheduleParams.from_vector(res.x),
        energy_density=float(res.fun),
        ground_overlap=float("nan"),
        n_iters=int(res.nit),
        stage=stage,
        trace=np.array(trace, dtype=np.float64),
        warning=warning,
        n_fev=wrapped.n_fev,
        wall_s=time.perf_counter() - started,
    )


def _finalize(result, table, mixer):
    """Fill the ground overlap and pin the stored energy to a fresh
    re-evaluation of the returned parameters."""
    report = evaluate(result.params, table, mixer)
    result.energy_density = report.energy_density
    result.ground_overlap = report.ground_overlap
    return result


def qaoa1(table, n_steps, mixer=None, bfgs=None, scan=None, dqa_dt=None):
    """Scan the linear-schedule step size, then BFGS from the optimum."""
    mixer = mixer or statevec.MixerConfig()
    if dqa_dt is None:
        if scan is None:
            scan = scan_dt(table, n_steps, mixer=mixer)
        dqa_dt = scan.argmin_dt
    start = dqa_schedule(DqaConfig(n_steps, dqa_dt))
    result = bfgs_minimize(make_objective(table, mixer), start, bfgs, stage="qaoa1")
    return _finalize(result, table, mixer)


def qaoa2(table, n_steps, strategy="smooth_restart", base=None,
          qaoa1_result=None, window=3, mixer=None, bfgs=None, scan=None):
    """Second-shot optimization towards a smooth protocol.

    smooth_restart: moving-average the qaoa1 optimum and BFGS again; if the
    restart fails to improve, the first-stage optimum is kept (flagged).
    interpolate: resample a stored lower-P solution ``base`` to n_steps and
    BFGS from there (the power-of-two chaining strategy).
    """
    mixer = mixer or statevec.MixerConfig()
    if strategy == "smooth_restart":
        if qaoa1_result is None:
            qaoa1_result = qaoa1(table, n_steps, mixer=mixer, bfgs=bfgs, scan=scan)
        # clamp to the largest odd window the schedule admits
        w = min(window, n_steps)
        if w % 2 == 0:
            w -= 1
        start = smooth(qaoa1_result.params, w)
    elif strategy == "interpolate":
        if base is None:
            raise ValueError("interpolate strategy needs a lower-P base result")
        if base.params.p >= n_steps:
            raise ValueError("base result must have P < n_steps")
        start = interpolate(base.params, n_steps)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    result = bfgs_minimize(make_objective(table, mixer), start, bfgs, stage="qaoa2")
    result = _finalize(result, table, mixer)
    if qaoa1_result is not None and qaoa1_result.energy_density < result.energy_density:
        result = QaoaResult(
            params=qaoa1_result.params,
            energy_density=qaoa1_result.energy_density,
            ground_overlap=qaoa1_result.ground_overlap,
            n_iters=result.n_iters,
            stage="qaoa2",
            trace=result.trace,
            warning="smooth restart did not improve; kept first-stage optimum",
            n_fev=result.n_fev,
        )
    return result


def transfer(ansatz, table, mixer=None, bfgs=None):
    """BFGS on a (different) sample starting from a smooth protocol."""
    mixer = mixer or statevec.MixerConfig()
    result = bfgs_minimize(make_objective(table, mixer), ansatz, bfgs,
                           stage="transferred")
    return _finalize(result, table, mixer)


def smoothness_metric(params):
    """Mean squared second difference of betas and gammas on the uniform
    step grid, each normalized by the sequence variance; 0 for affine."""
    if params.p < 3:
        raise ValueError("smoothness metric needs P >= 3")

    def term(x):
        curv = np.mean(np.diff(x, n=2) ** 2)
        var = np.var(x)
        return curv / var if var > 1e-300 else 0.0

    return 0.5 * (term(params.betas) + term(params.gammas))


def save_result(result, path, table=None, seeds=None):
    """Result JSON; nc/provenance pulled from the table when given."""
    doc = {
        "stage": result.stage,
        "P": result.params.p,
        "nc": None if table is None else table.variant,
        "energy_density": result.energy_density,
        "ground_overlap": result.ground_overlap,
        "n_iters": result.n_iters,
        "n_fev": result.n_fev,
        "wall_s": result.wall_s,
        "warning": result.warning,
        "params": {
            "betas": [float(b) for b in result.params.betas],
            "gammas": [float(g) for g in result.params.gammas],
        },
        "provenance": None if table is None else table.provenance,
        "randomize_seed": None if table is None else table.randomize_seed,
        "seeds": seeds or {},
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def load_result(path):
    with open(path) as fh:
        doc = json.load(fh)
    params = ScheduleParams(np.array(doc["params"]["betas"]),
                            np.array(doc["params"]["gammas"]))
    return QaoaResult(
        params=params,
        energy_density=float(doc["energy_density"]),
        ground_overlap=float(doc["ground_overlap"]),
        n_iters=int(doc["n_iters"]),
        stage=doc["stage"],
        trace=np.zeros((0, 3)),
        warning=doc.get("warning"),
        n_fev=int(doc.get("n_fev", 0)),
        wall_s=float(doc.get("wall_s", 0.0)),
    )


def save_trace(result, path):
    lines = ["iter,energy_density,grad_norm"]
    for it, eps, gnorm in result.trace:
        lines.append(f"{int(it)},{float(eps)!r},{float(gnorm)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
