"""Quarter-wave design of the Bragg period and duty cycle."""
from __future__ import annotations

import numpy as np

from ..constants import C0
from .geometry import FiberGeometry
from .solver import RootNotFoundError, dispersion_root


class DesignInfeasible(RuntimeError):
    pass


def effective_index(n, a, b, wavelength, family="TM", n_scan=161):
    """Effective index q/k0 of the fundamental l = 0 mode of a uniform shell."""
    geom = FiberGeometry("uniform", a, b, n)
    omega = 2.0 * np.pi * C0 / wavelength
    k0 = omega / C0
    lo, hi = k0 * (1.0 + 1e-6), k0 * n * (1.0 - 1e-6)
    try:
        pt = dispersion_root(geom, 0, family, (0.5 * (lo + hi), omega), (lo, hi), n_scan=n_scan,
                             axis="q", select="highest")
    except RootNotFoundError as exc:
        raise DesignInfeasible(f"no guided {family} mode for n = {n} at {wavelength:.4e} m") from exc
    return pt.q / k0


def quarter_wave(n_eff1, n_eff2, wavelength):
    """Period and n1 duty cycle making both segments a quarter wave thick.

    n_eff1 D period = n_eff2 (1 - D) period = wavelength / 4.
    """
    if n_eff1 <= 0 or n_eff2 <= 0:
        raise DesignInfeasible("effective indices must be positive")
    seg1 = wavelength / (4.0 * n_eff1)
    seg2 = wavelength / (4.0 * n_eff2)
    period = seg1 + seg2
    return period, seg1 / period


def design_bragg(n1, n2, wavelength_bg, a, b, family="TM"):
    """(period, duty) of a Bragg shell with a gap at ``wavelength_bg``.

    Effective indices come from auxiliary uniform-shell solves with index n1
    and n2; ``duty`` is the fraction of the period filled with n1, matching
    :class:`FiberGeometry`.
    """
    ne1 = effective_index(n1, a, b, wavelength_bg, family)
    ne2 = effective_index(n2, a, b, wavelength_bg, family)
    period, duty = quarter_wave(ne1, ne2, wavelength_bg)
    return period, duty, (ne1, ne2)
