"""Steady-state transport for fermionic chains driven by Markovian or
fermionic reservoirs, computed from Keldysh Green functions and validated
against an exact master-equation solver.

Units: hbar = e = k_B = 1; energies and rates in units of the hopping |J|.
"""

from .model import (
    BulkKind,
    ChainModel,
    Drive,
    FermionicDrive,
    FermionicReservoir,
    LindbladDrive,
    LindbladReservoir,
    ModelError,
    QuadratureSpec,
    ValidationReport,
    validate,
)
from .quadrature import IntegrandProfile, NonConvergence, integrate, integrate_unbounded
from .greens import (
    ClosedFormParams,
    GreenSet,
    OnShellSingularityError,
    closed_form_chain_gf,
    closed_form_first_row,
    edge_widths,
    green_set,
    keldysh_from_rak,
    retarded_chain_dense,
    retarded_single_site,
)
from .transport import (
    CouplingMatrices,
    CurrentResult,
    bounding_current,
    conductance_finite_temperature,
    conductance_high_temperature,
    current_dissipative_chain,
    current_free_fermionic,
    current_free_lindblad,
    current_lindblad_generic,
    current_meir_wingreen,
    fermi,
    map_fermionic_to_lindblad,
    occupation_fermionic,
    occupation_lindblad,
    transmission,
)
from . import oracle

__version__ = "0.1.0"
