"""Binary-perceptron problem instances and their exact energy tables.

A training set is M random +-1 patterns over N spins with all labels +1
(labels are folded into the patterns at evaluation time, so classification
of pattern mu reduces to a positive overlap). The cost of a configuration
is the number of misclassified patterns (variant nc=0) or the summed
magnitude of the misclassifying overlaps (nc=1); a zero overlap counts as
misclassified. For odd N a zero overlap cannot occur and both variants
share the same zero-cost configurations.
"""

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels

# Hard cap on table size: 2^28 float64 energies = 2 GiB.
MAX_SPINS = 28

_TABLE_MAGIC = b"EQTB"
_TABLE_VERSION = 1


class CapacityError(ValueError):
    """Requested register size exceeds the exact-table memory cap."""


def _check_spins(n_spins, max_spins=MAX_SPINS):
    if not 1 <= n_spins <= max_spins:
        raise CapacityError(f"n_spins={n_spins} outside [1, {max_spins}]")


def _check_variant(variant):
    if variant not in (0, 1):
        raise ValueError(f"cost variant must be 0 or 1, got {variant!r}")


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """One perceptron sample: patterns xi (M x N), labels tau (M), both +-1."""

    n_spins: int
    n_patterns: int
    patterns: np.ndarray
    labels: np.ndarray
    seed: int

    def __post_init__(self):
        if self.patterns.shape != (self.n_patterns, self.n_spins):
            raise ValueError("patterns shape must be (n_patterns, n_spins)")
        if self.labels.shape != (self.n_patterns,):
            raise ValueError("labels shape must be (n_patterns,)")
        if not np.all(np.abs(self.patterns) == 1):
            raise ValueError("pattern entries must be +-1")
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be +-1")

    @property
    def load_density(self):
        """alpha = M/N."""
        return self.n_patterns / self.n_spins

    def effective_patterns(self):
        """Patterns with labels folded in (tau * xi), as int8."""
        return (self.labels[:, None] * self.patterns).astype(np.int8)


def generate_instance(n_spins, n_patterns, seed):
    """Draw a training set of fair +-1 patterns; labels are all +1.

    Deterministic for a given seed (PCG64 stream).
    """
    if n_spins < 1 or n_patterns < 1:
        raise ValueError("n_spins and n_patterns must be positive")
    rng = np.random.default_rng(np.uint64(seed))
    patterns = (2 * rng.integers(0, 2, size=(n_patterns, n_spins)) - 1).astype(np.int8)
    labels = np.ones(n_patterns, dtype=np.int8)
    return TrainingSet(n_spins, n_patterns, patterns, labels, int(seed))


def config_spins(config, n_spins):
    """Decode a basis-state integer into the spin vector (bit 0 -> +1)."""
    bits = (config >> np.arange(n_spins)) & 1
    return (1 - 2 * bits).astype(np.int64)


def overlap(config, pattern_index, ts):
    """Label-folded overlap m_mu = (1/sqrt(N)) sum_j sigma_j tau_mu xi_mu_j."""
    if not 0 <= config < (1 << ts.n_spins):
        raise IndexError(f"config {config} out of range for N={ts.n_spins}")
    if not 0 <= pattern_index < ts.n_patterns:
        raise IndexError(f"pattern index {pattern_index} out of range")
    sigma = config_spins(config, ts.n_spins)
    folded = int(ts.labels[pattern_index]) * ts.patterns[pattern_index].astype(np.int64)
    return float(sigma @ folded) / math.sqrt(ts.n_spins)


def _integer_overlaps(config, ts):
    sigma = config_spins(config, ts.n_spins)
    return ts.effective_patterns().astype(np.int64) @ sigma


def classical_energy(config, ts, variant):
    """Cost of one configuration: sum_mu |m_mu|^nc Theta(-m_mu), Theta(0)=1."""
    _check_variant(variant)
    if not 0 <= config < (1 << ts.n_spins):
        raise IndexError(f"config {config} out of range for N={ts.n_spins}")
    ov = _integer_overlaps(config, ts)
    bad = ov <= 0
    if variant == 0:
        return float(np.count_nonzero(bad))
    # scale the integer-unit sum exactly as the table builder does, so the
    # per-config path and the Gray-code table agree bitwise
    return float(-ov[bad].sum()) * (1.0 / math.sqrt(ts.n_spins))


@dataclass(eq=False)
class EnergyTable:
    """Diagonal of the target Hamiltonian over all 2^N configurations.

    variant 0/1 marks a perceptron cost table; variant None is a generic
    diagonal (e.g. the quadratic-approximation Hamiltonian) that may carry
    negative values.
    """

    n_spins: int
    values: np.ndarray
    variant: int | None
    provenance: str = "original"
    randomize_seed: int | None = None
    _phase_levels: np.ndarray | None = field(default=None, repr=False)
    _phase_idx: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.values.shape != (1 << self.n_spins,):
            raise ValueError("values length must be 2^n_spins")
        if self.provenance not in ("original", "randomized"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.variant is not None:
            _check_variant(self.variant)
            if np.any(self.values < 0):
                raise ValueError("cost-table values must be non-negative")

    @property
    def dim(self):
        return 1 << self.n_spins

    def phase_basis(self):
        """(levels, idx) with values == levels[idx]; cached.

        Perceptron costs take at most M*N+1 distinct values (integer
        overlap units), so diagonal phases reduce to a small lookup table.
        Returns None for generic diagonals with too many levels.
        """
        if self._phase_idx is not None:
            return self._phase_levels, self._phase_idx
        if self.variant is not None:
            scale = 1.0 if self.variant == 0 else math.sqrt(self.n_spins)
            scaled = np.rint(self.values * scale)
            levels = np.arange(int(scaled.max()) + 1, dtype=np.float64) / scale
            idx = scaled.astype(np.int32)
        else:
            levels, idx = np.unique(self.values, return_inverse=True)
            if levels.size > (1 << 16):
                return None
            idx = idx.astype(np.int32)
        self._phase_levels = levels
        self._phase_idx = idx
        return levels, idx

    def solution_mask(self):
        """Boolean mask of zero-energy configurations."""
        if self.variant == 0:
            return self.values == 0.0
        return np.abs(self.values) < 1e-12


def build_energy_table(ts, variant, max_spins=MAX_SPINS):
    """Materialize the full 2^N cost diagonal via Gray-code updates."""
    _check_variant(variant)
    _check_spins(ts.n_spins, max_spins)
    out = np.empty(1 << ts.n_spins, dtype=np.float64)
    kernels.fill_energy_table(ts.effective_patterns(), variant, out)
    if variant == 1:
        out *= 1.0 / math.sqrt(ts.n_spins)
    return EnergyTable(ts.n_spins, out, variant)


def count_solutions(table):
    """Number of zero-energy configurations."""
    return int(np.count_nonzero(table.solution_mask()))


def randomize_table(table, seed):
    """Uniformly permute the energies, preserving the spectrum multiset."""
    if table.provenance != "original":
        raise ValueError("table was already randomized; refuse to re-randomize")
    rng = np.random.default_rng(np.uint64(seed))
    values = rng.permutation(table.values)
    return EnergyTable(table.n_spins, values, table.variant,
                       provenance="randomized", randomize_seed=int(seed))


@dataclass(frozen=True)
class SaConfig:
    n_sweeps: int = 1000
    temp_initial: float = 2.0
    temp_final: float = 0.01
    seed: int = 0
    schedule_kind: str = "geometric"

    def __post_init__(self):
        if self.n_sweeps < 1:
            raise ValueError("n_sweeps must be positive")
        if not self.temp_initial >= self.temp_final >= 0:
            raise ValueError("need temp_initial >= temp_final >= 0")
        if self.schedule_kind not in ("linear", "geometric"):
            raise ValueError(f"unknown schedule kind {self.schedule_kind!r}")

    def temperatures(self):
        if self.n_sweeps == 1:
            return np.array([self.temp_initial])
        if self.schedule_kind == "linear":
            return np.linspace(self.temp_initial, self.temp_final, self.n_sweeps)
        lo = max(self.temp_final, 1e-300)
        return self.temp_initial * (lo / self.temp_initial) ** (
            np.arange(self.n_sweeps) / (self.n_sweeps - 1))


@dataclass
class SaResult:
    best_config: int
    best_energy: float
    trajectory: np.ndarray  # best-so-far energy after each sweep
    initial_config: int
    n_accepted: int
    n_proposed: int


def simulated_annealing(table, cfg):
    """Single-spin-flip Metropolis search on the table's energies."""
    rng = np.random.default_rng(np.uint64(cfg.seed))
    start = int(rng.integers(0, table.dim))
    uniforms = rng.random(cfg.n_sweeps * table.n_spins)
    temps = cfg.temperatures()
    best_c, best_e, traj, n_acc = kernels.metropolis_run(
        table.values, table.n_spins, temps, uniforms, start)
    return SaResult(int(best_c), float(best_e), traj, start,
                    int(n_acc), cfg.n_sweeps * table.n_spins)


@dataclass(frozen=True)
class FilterDecision:
    accepted: bool
    n_solutions: int
    sa_best_energy: float


def filter_instance(ts, sa_cfg=None, min_solutions=21, sa_trials=20):
    """Keep a sample only if it has > min_solutions zero-energy configs and
    none of sa_trials independent SA runs reaches energy zero."""
    if sa_cfg is None:
        sa_cfg = SaConfig(seed=ts.seed)
    table = build_energy_table(ts, 0)
    n_sol = count_solutions(table)
    seeds = np.random.SeedSequence(sa_cfg.seed).generate_state(sa_trials, np.uint64)
    best = math.inf
    for s in seeds:
        run = simulated_annealing(table, SaConfig(
            n_sweeps=sa_cfg.n_sweeps, temp_initial=sa_cfg.temp_initial,
            temp_final=sa_cfg.temp_final, seed=int(s),
            schedule_kind=sa_cfg.schedule_kind))
        best = min(best, run.best_energy)
        if best == 0.0:
            break
    accepted = n_sol > min_solutions and best > 0.0
    return FilterDecision(accepted, n_sol, float(best))


@dataclass(frozen=True)
class SkHamiltonian:
    """Quadratic-approximation Hamiltonian: local fields h and Hebbian J."""

    fields_h: np.ndarray
    couplings_J: np.ndarray

    def __post_init__(self):
        n = self.fields_h.shape[0]
        if self.couplings_J.shape != (n, n):
            raise ValueError("couplings must be square, matching fields")
        if not np.allclose(self.couplings_J, self.couplings_J.T):
            raise ValueError("couplings must be symmetric")
        if np.any(np.diag(self.couplings_J) != 0):
            raise ValueError("couplings must have zero diagonal")


def build_sk_hamiltonian(ts):
    """h_j = (1/sqrt(N)) sum_mu xi_mu_j, J_jj' = (1/N) sum_mu xi_mu_j xi_mu_j'."""
    eff = ts.effective_patterns().astype(np.float64)
    n = ts.n_spins
    h = eff.sum(axis=0) / math.sqrt(n)
    j = eff.T @ eff / n
    np.fill_diagonal(j, 0.0)
    return SkHamiltonian(h, j)


def sk_energy_table(sk, max_spins=MAX_SPINS):
    """Materialize -sum h_j sigma_j + sum_{j!=j'} J sigma sigma as a generic diagonal."""
    n = sk.fields_h.shape[0]
    _check_spins(n, max_spins)
    out = np.empty(1 << n, dtype=np.float64)
    kernels.sk_diagonal(np.ascontiguousarray(sk.couplings_J).ravel(),
                        np.ascontiguousarray(sk.fields_h), out, n)
    return EnergyTable(n, out, None)


def save_instance(ts, path):
    """Write the instance JSON (patterns and labels as +-1 ints)."""
    doc = {
        "n_spins": ts.n_spins,
        "n_patterns": ts.n_patterns,
        "seed": ts.seed,
        "labels": [int(x) for x in ts.labels],
        "patterns": [[int(x) for x in row] for row in ts.patterns],
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def load_instance(path):
    with open(path) as fh:
        doc = json.load(fh)
    return TrainingSet(
        int(doc["n_spins"]), int(doc["n_patterns"]),
        np.asarray(doc["patterns"], dtype=np.int8),
        np.asarray(doc["labels"], dtype=np.int8),
        int(doc["seed"]))


def save_table(table, path):
    """Binary cache: EQTB header + little-endian float64 energies."""
    if table.variant is None:
        raise ValueError("only perceptron cost tables use the EQTB format")
    header = _TABLE_MAGIC + struct.pack(
        "<BBBIQ", _TABLE_VERSION, table.variant,
        0 if table.provenance == "original" else 1,
        table.n_spins, table.randomize_seed or 0)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(table.values.astype("<f8").tobytes())
    os.replace(tmp, path)


def load_table(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _TABLE_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        version, variant, prov, n_spins, seed = struct.unpack("<BBBIQ", fh.read(15))
        if version != _TABLE_VERSION:
            raise ValueError(f"unsupported table version {version}")
        values = np.frombuffer(fh.read((1 << n_spins) * 8), dtype="<f8").astype(np.float64)
    return EnergyTable(int(n_spins), values, int(variant),
                       provenance="original" if prov == 0 else "randomized",
                       randomize_seed=int(seed) if prov == 1 else None)
