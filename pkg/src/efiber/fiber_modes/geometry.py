"""Fiber geometry description and the smoothed Bragg permittivity profile."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class FiberGeometry:
    """Hollow-core nanofiber: vacuum core (rho < a), dielectric shell, vacuum outside.

    For ``kind == "bragg"`` the shell alternates between ``n1`` and ``n2``
    along z with period ``period``; ``duty`` is the fraction of the period
    occupied by ``n1``.
    """

    kind: str
    a: float
    b: float
    n1: float
    n2: float | None = None
    period: float | None = None
    duty: float | None = None
    p_smooth: int = 10

    def __post_init__(self):
        if self.kind not in ("uniform", "bragg"):
            raise GeometryError(f"unknown fiber kind {self.kind!r}")
        if not 0 < self.a < self.b:
            raise GeometryError("require 0 < a < b")
        if self.n1 < 1:
            raise GeometryError("n1 must be >= 1")
        if self.kind == "bragg":
            if self.n2 is None or self.n2 < 1:
                raise GeometryError("bragg geometry needs n2 >= 1")
            if self.period is None or self.period <= 0:
                raise GeometryError("bragg geometry needs period > 0")
            if self.duty is None or not 0 < self.duty < 1:
                raise GeometryError("bragg geometry needs 0 < duty < 1")
            if self.p_smooth <= 0 or self.p_smooth % 2:
                raise GeometryError("p_smooth must be a positive even integer")

    @property
    def is_bragg(self):
        return self.kind == "bragg"

    @property
    def sigma(self):
        """Half-width of the super-Gaussian n2 segment."""
        return (1.0 - self.duty) * self.period / 2.0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def smooth_permittivity(geom: FiberGeometry, z):
    """Shell permittivity eps(z), periodic with the Bragg period.

    eps = n1^2 + (n2^2 - n1^2) exp(-((z - period/2)/sigma)^p / 2)
    """
    if not geom.is_bragg:
        raise GeometryError("smooth_permittivity needs a bragg geometry")
    lam = geom.period
    zr = np.mod(np.asarray(z, dtype=float), lam)
    s = (zr - lam / 2.0) / geom.sigma
    return geom.n1 ** 2 + (geom.n2 ** 2 - geom.n1 ** 2) * np.exp(-0.5 * s ** geom.p_smooth)


def duty_from_sigma(sigma, period):
    return 1.0 - 2.0 * sigma / period


def fourier_coefficients(geom: FiberGeometry, kmax, n_samples=256, func=None):
    """Fourier coefficients f_k, |k| <= kmax, of a function of eps over one cell.

    ``func`` maps eps samples to the sampled quantity (default: identity).
    Returned array is indexed so that ``out[k + kmax]`` is the coefficient of
    exp(2 pi i k z / period).
    """
    if not geom.is_bragg:
        val = geom.n1 ** 2 if func is None else float(func(np.array(geom.n1 ** 2)))
        out = np.zeros(2 * kmax + 1, dtype=complex)
        out[kmax] = val
        return out
    n_samples = max(int(n_samples), 4 * kmax + 2)
    z = np.arange(n_samples) * geom.period / n_samples
    eps = smooth_permittivity(geom, z)
    vals = eps if func is None else func(eps)
    spec = np.fft.fft(vals) / n_samples
    k = np.arange(-kmax, kmax + 1)
    return spec[k % n_samples]
