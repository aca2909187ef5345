"""Ponderomotive electron guiding: trap, guided states, leakage and length limits."""
from .beam import ElectronBeam
from .io import LEAKY_COLUMNS, leaky_table, write_leaky_csv, write_trap_json
from .leaky import LeakyRootNotFound, leaky_eigenvalue, mean_free_path
from .limits import geometric_bound, gvm_length, loss_length
from .trap import (FamilyError, TrapError, TrapFit, TrapNotParabolicWarning, TrapSolution,
                   delta_r, fit_trap, guided_wavefunction, peak_fluence, ponderomotive_potential,
                   solve_trap)

__all__ = [
    "ElectronBeam", "LEAKY_COLUMNS", "leaky_table", "write_leaky_csv", "write_trap_json",
    "LeakyRootNotFound", "leaky_eigenvalue", "mean_free_path", "geometric_bound", "gvm_length",
    "loss_length", "FamilyError", "TrapError", "TrapFit", "TrapNotParabolicWarning", "TrapSolution",
    "delta_r", "fit_trap", "guided_wavefunction", "peak_fluence", "ponderomotive_potential", "solve_trap",
]
