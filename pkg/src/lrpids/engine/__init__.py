"""
lrpids Engine Module.

- sampler: counter-based realizations and window graphs
- operator: finite-volume Hamiltonians
- spectra: eigensolves and step-function algebra
- ids: IDS estimators, atoms, convergence scans
- diagnostics: boundaries, long edges, concentration, Lifshitz probe
"""

from .diagnostics import (
    Schedule,
    boundary_size,
    concentration_check,
    default_schedule,
    fit_lifshitz_exponent,
    lifshitz_probe,
    long_edge_count,
)
from .ids import AtomReport, IdsEstimate, atom_report, convergence_scan, ids_counting, ids_pastur_shubin
from .operator import SymmetricMatrix, apply, assemble
from .sampler import EdgeKey, WindowGraph, edge_bernoulli, edge_weight, sample_window, shift_realization
from .spectra import Spectrum, StepFunction, average, counting_function, eigen, normalize, sup_distance

__all__ = [
    "Schedule",
    "boundary_size",
    "concentration_check",
    "default_schedule",
    "fit_lifshitz_exponent",
    "lifshitz_probe",
    "long_edge_count",
    "AtomReport",
    "IdsEstimate",
    "atom_report",
    "convergence_scan",
    "ids_counting",
    "ids_pastur_shubin",
    "SymmetricMatrix",
    "apply",
    "assemble",
    "EdgeKey",
    "WindowGraph",
    "edge_bernoulli",
    "edge_weight",
    "sample_window",
    "shift_realization",
    "Spectrum",
    "StepFunction",
    "average",
    "counting_function",
    "eigen",
    "normalize",
    "sup_distance",
]
