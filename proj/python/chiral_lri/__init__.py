"""Invariant-based pulse design for discriminating chiral molecules.

Thin Python layer over the C++ core; see ``help(chiral_lri._core)``.
"""

from ._core import (
    ChiralError,
    Handedness,
    InvariantSchedule,
    SensitivityKind,
    __version__,
    ansatz_schedule,
    build_hamiltonian,
    eta_plus,
    exact_fidelity,
    invariant_matrix,
    optimize_n,
    perturbative_fidelity,
    population_trace,
    pulses,
    q_alpha,
    q_delta,
    schedule,
    sps_schedule,
    validate,
)

__all__ = [
    "ChiralError",
    "Handedness",
    "InvariantSchedule",
    "SensitivityKind",
    "__version__",
    "ansatz_schedule",
    "build_hamiltonian",
    "eta_plus",
    "exact_fidelity",
    "invariant_matrix",
    "optimize_n",
    "perturbative_fidelity",
    "population_trace",
    "pulses",
    "q_alpha",
    "q_delta",
    "schedule",
    "sps_schedule",
    "validate",
]
