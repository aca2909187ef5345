"""Electron beam kinematics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import C0, H_PLANCK, HBAR, M_E, MEC2_EV


@dataclass(frozen=True)
class ElectronBeam:
    """Relativistic electron beam with kinetic energy ``energy_eV``."""

    energy_eV: float
    delta_E_eV: float = 0.0

    def __post_init__(self):
        if not self.energy_eV > 0:
            raise ValueError("electron kinetic energy must be positive")
        if self.delta_E_eV < 0:
            raise ValueError("energy spread must be non-negative")

    @classmethod
    def from_beta(cls, beta, delta_E_eV=0.0):
        if not 0 < beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        gamma = 1.0 / np.sqrt(1.0 - beta * beta)
        return cls((gamma - 1.0) * MEC2_EV, delta_E_eV)

    @property
    def gamma(self):
        return 1.0 + self.energy_eV / MEC2_EV

    @property
    def beta(self):
        return float(np.sqrt(1.0 - 1.0 / self.gamma ** 2))

    @property
    def velocity(self):
        return self.beta * C0

    @property
    def momentum(self):
        """Kinetic momentum in kg m/s."""
        return self.gamma * M_E * self.velocity

    @property
    def wavenumber(self):
        return self.momentum / HBAR

    @property
    def de_broglie(self):
        return H_PLANCK / self.momentum

    def energy_at(self, k):
        """Total energy (J) at wavenumber k from the relativistic dispersion."""
        mc2 = M_E * C0 ** 2
        return np.sqrt(mc2 ** 2 + (HBAR * C0 * np.asarray(k)) ** 2)

    def emission_frequency(self, Q):
        """[E(k) - E(k - Q)] / hbar for a photon carrying momentum hbar Q."""
        k = self.wavenumber
        return (self.energy_at(k) - self.energy_at(k - np.asarray(Q))) / HBAR
