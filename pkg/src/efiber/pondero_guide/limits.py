"""Length limits on the guided interaction: diffraction and pulse walk-off."""
from __future__ import annotations

import math

from ..constants import COMPTON


def geometric_bound(beam, wavelength, h_ratio=1.0, w_ratio=0.5):
    """Longest interaction over which a focused free beam clears the structure.

    L_max = (beta gamma)^3 / (8 pi) * lambda^2 / lambda_C * h_ratio * w_ratio,
    with the height and waist given relative to the optimal height.
    """
    if not (h_ratio > 0 and w_ratio > 0):
        raise ValueError("h_ratio and w_ratio must be positive")
    bg = beam.beta * beam.gamma
    return bg ** 3 / (8.0 * math.pi) * wavelength ** 2 / COMPTON * h_ratio * w_ratio


def gvm_length(v_e, v_g, tau):
    """Walk-off length tau / |1/v_g - 1/v_e|; inf when the velocities match."""
    if not tau > 0:
        raise ValueError("pulse duration must be positive")
    mismatch = abs(1.0 / v_g - 1.0 / v_e)
    if mismatch == 0.0 or mismatch * max(v_e, v_g) < 1e-15:
        return math.inf
    return tau / mismatch


def loss_length(loss_dB_per_m):
    """1/e intensity length 10 / (ln 10 * loss) for a loss in dB/m; inf for zero loss."""
    if loss_dB_per_m < 0:
        raise ValueError("loss must be non-negative")
    if loss_dB_per_m == 0:
        return math.inf
    return 10.0 / (math.log(10.0) * loss_dB_per_m)
