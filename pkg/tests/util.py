"""Shared test helpers: finite-difference oracles and a velocity grid search."""

import numpy as np


def fd_gradient_check(loss_fn, params, grads, per_param=10, h=1e-6, tol=1e-4):
    """Central finite differences on a sample of entries of every parameter.

    loss_fn must be a zero-argument callable that re-evaluates the loss with
    the current parameter values (re-seeding any sampling internally).
    """
    worst = 0.0
    for p, g in zip(params, grads):
        it = np.nditer(p, flags=["multi_index"])
        for _ in range(min(p.size, per_param)):
            ix = it.multi_index
            old = p[ix]
            p[ix] = old + h
            f1 = loss_fn()
            p[ix] = old - h
            f2 = loss_fn()
            p[ix] = old
            fd = (f1 - f2) / (2.0 * h)
            rel = abs(fd - g[ix]) / max(1e-10, abs(fd) + abs(g[ix]))
            worst = max(worst, rel)
            it.iternext()
    assert worst < tol, f"finite-difference mismatch: rel err {worst:.3e}"
    return worst


def velocity_grid_oracle(constraints, v_pref, v_max, res=1e-3):
    """Dense grid search over the speed disc.

    Returns (best point, feasible flag): the closest feasible grid point to
    v_pref, or the grid point minimizing the largest constraint violation when
    no grid point is feasible.
    """
    xs = np.arange(-v_max, v_max + res / 2, res)
    X, Y = np.meshgrid(xs, xs)
    inside = X * X + Y * Y <= v_max * v_max
    feas = inside.copy()
    for c in constraints:
        feas &= ((X - c.point[0]) * c.normal[0] + (Y - c.point[1]) * c.normal[1]) >= 0
    if feas.any():
        d2 = (X - v_pref[0]) ** 2 + (Y - v_pref[1]) ** 2
        d2[~feas] = np.inf
        i = np.unravel_index(np.argmin(d2), d2.shape)
        return np.array([X[i], Y[i]]), True
    viol = np.zeros_like(X)
    for c in constraints:
        v = -((X - c.point[0]) * c.normal[0] + (Y - c.point[1]) * c.normal[1])
        viol = np.maximum(viol, np.maximum(v, 0.0))
    viol[~inside] = np.inf
    i = np.unravel_index(np.argmin(viol), viol.shape)
    return np.array([X[i], Y[i]]), False


def max_violation(constraints, v):
    return max((c.violation(v) for c in constraints), default=0.0)
