"""Guided modes of uniform and Bragg hollow-core nanofibers."""
from .geometry import (FiberGeometry, GeometryError, duty_from_sigma, fourier_coefficients,
                       smooth_permittivity)
from .bloch import BlochError, BlochModes, bloch_eigen
from .solver import (Band, BandPoint, ConditioningWarning, RootNotFoundError, boundary_matrix,
                     dispersion_root, five_point_derivatives, local_derivatives, make_point,
                     trace_band)
from .fields import (AccuracyError, continuity_residual, fourier_uz, mode_area, poynting_power,
                     sample_fields)
from .design import DesignInfeasible, design_bragg, effective_index, quarter_wave
from .io import BAND_COLUMNS, point_from_dict, point_to_dict, write_band_csv, write_point_json
