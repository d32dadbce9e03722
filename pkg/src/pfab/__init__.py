"""Abelian integrals of discontinuously perturbed quadratic centres."""

from ._accel import NUMBA_ENABLED
from .errors import DomainError, NumericalError, PfabError, ReductionError
from .systems import (
    PerturbationPoly,
    SystemKind,
    SystemSpec,
    hamiltonian,
    half_energy,
    make_system,
    vector_field,
)

__version__ = "0.1.0"
