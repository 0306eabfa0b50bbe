"""Desk-scale simulator for the adiabatic double-well rotation Z gate.

The package builds charge-basis Hamiltonians of two voltage-controlled
cos(2 theta) qubits with a tunable coupler, analyzes their spectra and
noise matrix elements, constructs minimal-time adiabatic rotation schedules,
and integrates the time-dependent Schroedinger equation to extract the
logical-subspace propagator and its average gate fidelity.

All library-level energies are angular GHz (rad/ns); times are ns. The CLI
(:mod:`wellrot.cli`) converts from/to plain GHz at the boundary.
"""

from .adiabatic import (
    ControlSchedule,
    NonadiabaticElement,
    adiabatic_frame_hamiltonian,
    nonadiabatic_elements,
    optimize_schedule,
)
from .basis import (
    ModeSpec,
    OperatorMatrix,
    fractional_cosine,
    harmonic_operator,
    identity,
    joint_harmonic,
    number_operator,
    parity_operator,
    two_mode_embed,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    GateError,
    NumericalError,
    PropagationError,
    WellrotError,
)
from .evolution import (
    GateResult,
    PropagationResult,
    average_gate_fidelity,
    doublet_dynamical_phase,
    logical_basis,
    logical_propagator,
    propagate,
)
from .hamiltonians import (
    CircuitParams,
    PotentialGrid,
    RotationFamily,
    circuit_family,
    circuit_hamiltonian,
    classical_potential,
    coupler_hamiltonian,
    dH_dphi,
    ideal_sin_sin_hamiltonian,
    low_energy_hamiltonian,
    minima_locations,
    potential_grid,
    rotated_potential_grid,
    sin_sin_family,
    single_qubit_hamiltonian,
    squeeze_corrections,
    well_distance,
)
from .junctions import (
    HarmonicAmplitudes,
    JunctionSpec,
    SquidCoeffs,
    abs_energy,
    harmonic_amplitudes,
    reconstruct_potential,
    squid_coeffs,
)
from .spectral import (
    ModelComparison,
    PhaseSpaceState,
    SpectralResult,
    compare_models,
    lowest_eigenpairs,
    noise_matrix_elements,
    spectrum_vs_angle,
    to_phase_space,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
