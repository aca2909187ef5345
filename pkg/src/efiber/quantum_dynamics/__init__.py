"""Truncated-Fock evolution of the electron-driven Kerr system and its observables."""
from .basis import (KINDS, BasisError, SupermodeBasis, build_cavity, build_continuum,
                    build_discrete, build_supermodes, driving_terms, fundamental_drive,
                    hermite_drive, optimal_scale)
from .evolve import (LEAKAGE_LIMIT, Generator, IntegrationError, QuantumTrajectory,
                     TruncationError, check_hermitian, evolve, evolve_auto, lanczos_expm,
                     magnus4_step, poisson_cutoff)
from .fock import DimensionError, FockSpace
from .io import (basis_summary, read_wigner_csv, trajectory_columns, write_manifest,
                 write_trajectory_csv, write_wigner_csv)
from .kgrid import OracleScaleError, continuum_grid, kgrid_hamiltonian, kgrid_oracle
from .observables import (CavityRegime, WignerAccuracyWarning, cavity_regime, classify_ratio,
                          displacement_element, g2_zero, reduce_and_wigner, reduced_density,
                          wigner)

__all__ = [
    "KINDS", "BasisError", "SupermodeBasis", "build_cavity", "build_continuum", "build_discrete",
    "build_supermodes", "driving_terms", "fundamental_drive", "hermite_drive", "optimal_scale",
    "LEAKAGE_LIMIT", "Generator", "IntegrationError", "QuantumTrajectory", "TruncationError",
    "check_hermitian", "evolve", "evolve_auto", "lanczos_expm", "magnus4_step", "poisson_cutoff",
    "DimensionError", "FockSpace", "basis_summary", "read_wigner_csv", "trajectory_columns",
    "write_manifest", "write_trajectory_csv", "write_wigner_csv", "OracleScaleError",
    "continuum_grid", "kgrid_hamiltonian", "kgrid_oracle", "CavityRegime",
    "WignerAccuracyWarning", "cavity_regime", "classify_ratio", "displacement_element", "g2_zero",
    "reduce_and_wigner", "reduced_density", "wigner",
]
