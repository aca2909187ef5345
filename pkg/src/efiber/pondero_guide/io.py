"""Tabular and JSON export of trap results."""
from __future__ import annotations

import csv
import json

LEAKY_COLUMNS = ("abar", "p_index", "minus_im_2p1")


def leaky_table(abars, p_indices):
    """Rows (abar, p, -Im(2p+1)) in abar-major order."""
    from .leaky import leaky_eigenvalue

    return [(float(a), int(p), -leaky_eigenvalue(a, p).imag) for a in abars for p in p_indices]


def write_leaky_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEAKY_COLUMNS)
        for a, p, m in rows:
            w.writerow([repr(float(a)), int(p), repr(float(m))])


def write_trap_json(path, solution):
    with open(path, "w") as fh:
        json.dump(solution.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
