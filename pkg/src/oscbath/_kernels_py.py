"""Pure NumPy/SciPy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def _forces(x, y, K, nu, g, gg, star):
    fx = -K @ x
    fx[star] += g @ y - gg * x[star]
    fk = -nu * y + g * x[star]
    return fx, fk


def leapfrog(x, p, y, k, K, inv_mass, nu, g, star, dt, nsteps):
    """Kick-drift-kick leapfrog for the composite oscillator network, in place."""
    if nsteps <= 0:
        return
    h = 0.5 * dt
    gg = float(np.sum(g * g / nu))
    fx, fk = _forces(x, y, K, nu, g, gg, star)
    for _ in range(nsteps):
        p += h * fx
        k += h * fk
        x += dt * inv_mass * p
        y += dt * nu * k
        fx, fk = _forces(x, y, K, nu, g, gg, star)
        p += h * fx
        k += h * fk


def power_iteration(indptr, indices, data, v0, shift, tol, maxiter, patience=5000):
    """Shifted power iteration for a nonnegative symmetric CSR matrix.

    Returns ``(lam, v, iterations, residual)`` where ``lam`` is the Rayleigh
    quotient of the unshifted matrix and ``residual`` is the entrywise relative
    residual ``max_i |(A v - lam v)_i| / (lam |v_i|)``. Stops early once the residual
    has not improved by 1% for ``patience`` iterations (roundoff floor).
    """
    n = v0.shape[0]
    A = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    v = np.array(v0, dtype=float)
    v /= np.linalg.norm(v)
    it = best_it = 0
    best = np.inf
    while True:
        u = A @ v
        rq = float(u @ v)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(u - rq * v) / (abs(rq) * np.abs(v))
        r[np.abs(u - rq * v) == 0] = 0.0
        res = float(np.nan_to_num(r, nan=1e300, posinf=1e300).max())
        if res <= tol or it >= maxiter:
            break
        if res < 0.99 * best:
            best, best_it = res, it
        elif it - best_it > patience:
            break
        u += shift * v
        v = u / np.linalg.norm(u)
        it += 1
    return rq, v, it, res
