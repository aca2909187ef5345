"""Direct discretized Kerr Hamiltonian on a small k grid (reference propagator).

    H = sum_j Delta_j T n_j + sum_j Omega_j T (A_j + A_j^dag) + kappa T N (N - 1)

is time independent inside the window, so snapshots follow from dense
matrix exponentials without any change of mode basis.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import linalg

from .evolve import QuantumTrajectory, _observables
from .fock import FockSpace

MAX_MODES = 12
MAX_EXCITATIONS = 4


class OracleScaleError(ValueError):
    pass


def continuum_grid(kind, K, gQ, x_max):
    """K-point sampling of a continuum spectrum: detunings Delta_j T and equal weights.

    Spectral points x_j are uniform on [-x_max, x_max]; Delta_j T = 2 D(x_j)
    with D = x (intersection) or x^2 (tangency). Weights are scaled so that
    the implied |g_Q| of the sampled fundamental wavepacket equals ``gQ``.
    """
    x = np.linspace(-x_max, x_max, K)
    D = x if kind == "ContinuumIntersection" else x * x
    w = np.ones(K)
    scale = gQ / np.linalg.norm(w * np.sinc(D / math.pi))
    return 2.0 * D, w * scale


def kgrid_hamiltonian(space, detuning_T, weights, kappaT):
    H = np.diag(np.asarray(space.occupation @ detuning_T, dtype=complex)
                + kappaT * space.total * (space.total - 1))
    for j, w in enumerate(weights):
        a = space.lower(j).toarray()
        H += w * (a + a.T)
    return H


def kgrid_oracle(detuning_T, weights, kappaT, N_max, state0=None, n_snapshots=101):
    """Evolve vacuum (default) over tau in [-1/2, 1/2] with dense exponentials.

    Per-mode populations refer to the grid modes A_j. States are in the frame
    where each mode carries its detuning; N and g2 do not depend on the frame.
    """
    d = np.asarray(detuning_T, dtype=float)
    K = d.size
    if K > MAX_MODES or N_max > MAX_EXCITATIONS:
        raise OracleScaleError(f"oracle limited to K <= {MAX_MODES}, N_max <= {MAX_EXCITATIONS}")
    space = FockSpace(K, N_max)
    H = kgrid_hamiltonian(space, d, weights, kappaT)
    psi0 = space.vacuum() if state0 is None else np.asarray(state0, dtype=complex)
    taus = np.linspace(-0.5, 0.5, n_snapshots)
    ev, U = linalg.eigh(H)
    c0 = U.conj().T @ psi0
    states = np.array([U @ (np.exp(-1j * ev * (t + 0.5)) * c0) for t in taus])
    obs = [_observables(space, s) for s in states]
    leak = max(space.shell_population(s, N_max) for s in states)
    drift = float(np.max(np.abs(1.0 - np.sum(np.abs(states) ** 2, axis=1))))
    return QuantumTrajectory(tau=taus, states=states, space=space,
                             N=np.array([o[0] for o in obs]),
                             populations=np.array([o[1] for o in obs]),
                             g2=np.array([o[2] for o in obs]), leakage=leak,
                             norm_drift=drift, steps=0, meta={"N_max": N_max, "M": K})
