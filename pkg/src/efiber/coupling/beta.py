"""Fraction of the emission that goes into the target mode."""
from __future__ import annotations

import warnings

TARGET = "TM01"


class BetaWarning(UserWarning):
    pass


def beta_factor(couplings, target=TARGET):
    """beta = |g_target|^2 / sum_s |g_s|^2 over a map mode label -> |g_Q,s|^2."""
    if target not in couplings:
        raise KeyError(f"target mode {target!r} missing from couplings")
    vals = {k: float(v) for k, v in couplings.items()}
    if any(v < 0 for v in vals.values()):
        raise ValueError("couplings must be non-negative")
    if len(vals) == 1:
        warnings.warn("no competing modes supplied: beta = 1", BetaWarning)
        return 1.0
    total = sum(vals.values())
    return vals[target] / total if total > 0 else 1.0
