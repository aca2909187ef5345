"""Truncated multimode Fock space with a total-excitation cutoff."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

MAX_DIM = 200_000


class DimensionError(ValueError):
    pass


def _occupations(M, N_max):
    """All tuples with sum <= N_max, ordered by total then reverse-lexicographically."""
    out = []
    for n in range(N_max + 1):
        for c in itertools.combinations_with_replacement(range(M), n):
            occ = [0] * M
            for k in c:
                occ[k] += 1
            out.append(tuple(occ))
    return out


@dataclass
class FockSpace:
    """Basis states, ladder operators and number operators for M modes."""

    M: int
    N_max: int

    def __post_init__(self):
        if self.M < 1 or self.N_max < 0:
            raise ValueError("need M >= 1 and N_max >= 0")
        dim = math.comb(self.M + self.N_max, self.M)
        if dim > MAX_DIM:
            raise DimensionError(f"Fock dimension {dim} exceeds {MAX_DIM}")
        self.states = _occupations(self.M, self.N_max)
        self.index = {s: i for i, s in enumerate(self.states)}
        occ = np.array(self.states, dtype=float).reshape(len(self.states), self.M)
        self.occupation = occ
        self.total = occ.sum(axis=1)
        self._lower = [self._build_lower(k) for k in range(self.M)]

    @property
    def dim(self):
        return len(self.states)

    def _build_lower(self, k):
        rows, cols, vals = [], [], []
        for j, s in enumerate(self.states):
            if s[k] == 0:
                continue
            t = list(s)
            t[k] -= 1
            rows.append(self.index[tuple(t)])
            cols.append(j)
            vals.append(math.sqrt(s[k]))
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def lower(self, k):
        return self._lower[k]

    def vacuum(self):
        psi = np.zeros(self.dim, dtype=complex)
        psi[0] = 1.0
        return psi

    def fock(self, occupation):
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index[tuple(occupation)]] = 1.0
        return psi

    def coherent(self, alphas):
        """Product coherent state projected on the truncated space (not renormalized)."""
        alphas = np.asarray(alphas, dtype=complex)
        psi = np.ones(self.dim, dtype=complex) * np.exp(-0.5 * np.sum(np.abs(alphas) ** 2))
        for k in range(self.M):
            n = self.occupation[:, k]
            lf = np.array([math.lgamma(v + 1) for v in n])
            psi *= np.where(n > 0, alphas[k] ** n, 1.0) * np.exp(-0.5 * lf)
        return psi

    def shell_population(self, psi, n):
        return float(np.sum(np.abs(psi[self.total == n]) ** 2))
