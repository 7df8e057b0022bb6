"""Small numeric helpers: deterministic grid minimization with local polish."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import minimize

from .core import Signomial, evaluate


def grid_minimize(
    f: Signomial,
    radius: float = 10.0,
    points: int = 9,
    polish: bool = True,
    center: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Coarse grid scan over a box plus a Nelder-Mead polish from the best cell.

    Used for bracketing lower-bound searches and as an independent check of
    closed-form minima; deterministic for fixed arguments.
    """
    n = f.n
    mid = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    axes = [np.linspace(m - radius, m + radius, points) for m in mid]
    pts = np.array(list(itertools.product(*axes)))
    vals = evaluate(f, pts)
    i = int(np.argmin(vals))
    best_x, best_v = pts[i], float(vals[i])
    if polish:
        res = minimize(
            lambda x: evaluate(f, x),
            best_x,
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        if res.fun < best_v:
            best_v, best_x = float(res.fun), res.x
    return best_v, best_x
