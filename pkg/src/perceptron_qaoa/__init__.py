"""Exact-simulation toolkit for training the binary perceptron with
digitized quantum annealing and QAOA: seeded instance generation and
filtering, full 2^N energy tables, a fast state-vector engine with exact
adjoint gradients, schedule optimization pipelines, landscape
randomization, and spectral-gap analysis."""

__version__ = "0.1.0"

from .instance import (CapacityError, EnergyTable, FilterDecision, SaConfig,
                       SaResult, SkHamiltonian, TrainingSet,
                       build_energy_table, build_sk_hamiltonian,
                       classical_energy, count_solutions, filter_instance,
                       generate_instance, load_instance, load_table, overlap,
                       randomize_table, save_instance, save_table,
                       simulated_annealing, sk_energy_table)
from .optimize import (BfgsConfig, QaoaResult, bfgs_minimize, qaoa1, qaoa2,
                       smoothness_metric, transfer)
from .schedules import (DqaConfig, DtLandscape, ScheduleParams, dqa_schedule,
                        effective_s, interpolate, scan_dt, smooth)
from .spectrum import GapCurve, gap_curve, hamiltonian_matvec, lowest_two
from .statevec import (EnergyReport, MixerConfig, StateVector,
                       apply_diagonal_phase, apply_mixer, energy_and_gradient,
                       evolve, expectation, gradient, plus_state)
