"""delaycrane: simulation and spectral analysis of a boundary-delayed
overhead-crane wave system with interior damping."""

from .model import (CraneParams, DegenerateParametersError, InitialData,
                    Regime, TensionProfile, Variant, ZetaFormula,
                    equilibrium_constant, initial_bracket, validate_params)
from .solver import (CraneState, Grid, SimConfig, SimEvent, SimResult,
                     discretize, mode_initial_data, mode_solution, rhs,
                     simulate, step, time_step)
from .diagnostics import (EnergySample, RateFit, auto_varpi,
                          conserved_functional, distance_to_equilibrium,
                          energy_E0, energy_E1, energy_total,
                          fit_exponential_rate, state_norm_H)
from .spectral import (CharProblem, InfeasibleWitness, Root, ScanResult,
                       char_reduced, char_residual, find_roots,
                       instability_witness_beta0, instability_witness_general,
                       spectral_abscissa, stability_scan, verify_residual,
                       winding_number)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
