"""Photon statistics, reduced states and Wigner functions."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..specfun import laguerre_poly

CLASSIFY_TOL = 1e-2


class WignerAccuracyWarning(UserWarning):
    pass


def g2_zero(space, psi):
    """<N(N-1)> / <N>^2 over the total excitation number; nan for the vacuum."""
    p = np.abs(np.asarray(psi)) ** 2
    N = float(p @ space.total)
    if N <= 1e-300:
        return math.nan
    return float(p @ (space.total * (space.total - 1))) / N ** 2


def reduced_density(space, psi, mode=0, electron_traced=False):
    """Density matrix of one mode after tracing out the others, size N_max + 1.

    With ``electron_traced`` the electron is traced out as well: its energy
    loss records the total excitation number, so sectors of different total
    N add incoherently.
    """
    if not 0 <= mode < space.M:
        raise IndexError("mode index out of range")
    psi = np.asarray(psi, dtype=complex)
    rho = np.zeros((space.N_max + 1, space.N_max + 1), dtype=complex)
    groups = {}
    for i, s in enumerate(space.states):
        rest = s[:mode] + s[mode + 1:]
        if electron_traced:
            rest = (sum(s),) + rest
        groups.setdefault(rest, []).append((s[mode], i))
    for members in groups.values():
        n = np.array([m[0] for m in members])
        a = psi[[m[1] for m in members]]
        rho[np.ix_(n, n)] += np.outer(a, a.conj())
    return rho


def displacement_element(m, n, beta):
    """<m|D(beta)|n> for complex beta (array)."""
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    if m >= n:
        pref = math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)))
        return pref * beta ** (m - n) * np.exp(-0.5 * x) * laguerre_poly(n, m - n, x)
    pref = math.exp(0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1)))
    return pref * (-beta.conj()) ** (n - m) * np.exp(-0.5 * x) * laguerre_poly(m, n - m, x)


def wigner(rho, alpha, n_trunc=None):
    """W(alpha) = (2/pi) Tr[rho D(2 alpha) P] with P the photon-number parity.

    Exact displaced-parity sum in the number basis. Warns when
    |alpha|^2 exceeds half the truncation, where the sum is unreliable.
    """
    rho = np.asarray(rho, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    dim = rho.shape[0]
    n_trunc = dim - 1 if n_trunc is None else n_trunc
    if np.max(np.abs(alpha) ** 2, initial=0.0) > 0.5 * n_trunc:
        warnings.warn(f"Wigner grid reaches |alpha|^2 > N_max/2 = {0.5 * n_trunc}",
                      WignerAccuracyWarning, stacklevel=2)
    W = np.zeros(alpha.shape, dtype=complex)
    beta = 2.0 * alpha
    for m in range(dim):
        for n in range(dim):
            if rho[m, n] != 0:
                W += rho[m, n] * (-1) ** m * displacement_element(n, m, beta)
    return (2.0 / math.pi) * W.real


def reduce_and_wigner(space, psi, mode, re_axis, im_axis, electron_traced=True):
    """Reduced photon state of ``mode`` and its Wigner function on a rectangular grid.

    Rows of the grid follow ``im_axis`` and columns ``re_axis``. By default
    the electron is traced out (see :func:`reduced_density`).
    """
    rho = reduced_density(space, psi, mode, electron_traced)
    A = np.asarray(re_axis)[None, :] + 1j * np.asarray(im_axis)[:, None]
    return rho, wigner(rho, A, space.N_max)


@dataclass
class CavityRegime:
    fsr: float
    ratio: float
    classification: str

    def to_dict(self):
        return dict(self.__dict__)


def cavity_regime(v_e, v_g, L, kappa, tol=CLASSIFY_TOL):
    """Effective free spectral range Delta = (pi v_e / L)(1 - v_g / v_e) and the 2 kappa / Delta regime."""
    if L <= 0:
        raise ValueError("length must be positive")
    fsr = math.pi * v_e / L * (1.0 - v_g / v_e)
    if fsr == 0.0:
        return CavityRegime(0.0, math.inf, "Degenerate")
    ratio = 2.0 * kappa / fsr
    return CavityRegime(fsr, ratio, classify_ratio(ratio, tol))


def classify_ratio(ratio, tol=CLASSIFY_TOL):
    """Cascade near integer 2 kappa / Delta, MaximalDetuning near half-integer."""
    r = abs(ratio)
    if abs(r - round(r)) <= tol:
        return "Cascade"
    if abs(r - math.floor(r) - 0.5) <= tol:
        return "MaximalDetuning"
    return "Intermediate"
