"""Shared numeric oracles for the test suite."""

import numpy as np


def fd_grads(value_fn, arrays, step=1e-6):
    """Central-difference gradients of ``value_fn(*arrays)``, one per array."""
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    grads = []
    for ai, arr in enumerate(arrays):
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[ai][idx] += step
            minus[ai][idx] -= step
            g[idx] = (value_fn(*plus) - value_fn(*minus)) / (2.0 * step)
        grads.append(g)
    return grads


def worst_rel(analytic, numeric, floor=1e-4):
    """Largest relative disagreement over coordinates above ``floor``.

    Coordinates where both magnitudes sit below ``floor`` are skipped:
    the difference quotient carries about 1e-9 absolute rounding noise at
    step 1e-6, so tiny coordinates cannot be certified in relative terms.
    """
    worst = 0.0
    for a, n in zip(analytic, numeric):
        a = np.asarray(a, dtype=np.float64)
        n = np.asarray(n, dtype=np.float64)
        for idx in np.ndindex(a.shape):
            hi = max(abs(float(a[idx])), abs(float(n[idx])))
            if hi <= floor:
                continue
            worst = max(worst, abs(float(a[idx]) - float(n[idx])) / hi)
    return worst
