"""Free-electron--photon coupling: phase matching, |g_Q|^2, beta-factor and Kerr terms."""
from .beta import BetaWarning, beta_factor
from .competitors import DEFAULT_COMPETITORS, competitor_coupling, line_matches
from .kerr import RegimeReport, kerr_and_phase, validate_regime
from .phase_match import (TANGENCY_THRESHOLD, NotPhaseMatchedError, PhaseMatchPoint,
                          find_phase_match)
from .result import (SWEEP_COLUMNS, CouplingResult, analyze_coupling, competitor_set,
                     sweep_rows, write_coupling_json, write_sweep_csv)
from .strength import (TANGENCY_CONSTANT, ResolutionError, SingularCouplingError,
                       coupling_spectrum, gq2_closed_form, integrate_spectrum, mode_overlap,
                       overlap_integral, resolved_grid, sinc2_integral_closed, sinc2_integral_quad,
                       taylor_band, total_coupling)

__all__ = [
    "BetaWarning", "beta_factor", "DEFAULT_COMPETITORS", "competitor_coupling", "line_matches",
    "RegimeReport", "kerr_and_phase", "validate_regime", "TANGENCY_THRESHOLD",
    "NotPhaseMatchedError", "PhaseMatchPoint", "find_phase_match", "SWEEP_COLUMNS",
    "CouplingResult", "analyze_coupling", "competitor_set", "sweep_rows", "write_coupling_json",
    "write_sweep_csv", "TANGENCY_CONSTANT", "ResolutionError", "SingularCouplingError",
    "coupling_spectrum", "gq2_closed_form", "integrate_spectrum", "mode_overlap",
    "overlap_integral", "resolved_grid", "sinc2_integral_closed", "sinc2_integral_quad",
    "taylor_band", "total_coupling",
]
