"""Spin-1 Jaynes-Cummings model: dressed spectrum, Lindblad steady states and photon correlations."""

from .errors import (
    DimensionError,
    IntegrationFailure,
    NonUnique,
    NoRoot,
    NotConverged,
    TruncationSuspect,
    UndefinedCorrelation,
    ZeroPhotonNumber,
)
from .hilbert import HilbertSpace, SparseOperator, StateVector, fock_annihilation, spin1_operators, tensor_lift
from .model import (
    ModelParams,
    RawParams,
    build_hamiltonian,
    build_two_level_jcm,
    collapse_operators,
    effective_params,
    excitation_number,
    u1_rotation,
)
from .spectrum import closed_form_energies, dark_state, dressed_block, resonance_curve, resonance_frequency
from .steady import (
    DensityMatrix,
    Superoperator,
    build_liouvillian,
    equal_time_g,
    expectation,
    photon_distribution,
    photon_number,
    solve_operating_point,
    steady_state,
)
from .twotime import CorrelationTrace, Propagator, evolve, g2_tau

__version__ = "0.1.0"
