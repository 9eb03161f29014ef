# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures and results mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef inline void _forces(double[::1] x, double[::1] y, const double[:, ::1] K,
                         const double[::1] nu, const double[::1] g, double gg,
                         Py_ssize_t star, double[::1] fx, double[::1] fk) noexcept nogil:
    cdef Py_ssize_t d = x.shape[0], N = y.shape[0]
    cdef Py_ssize_t i, j, a
    cdef double acc, gy = 0.0, xs = x[star]
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc -= K[i, j] * x[j]
        fx[i] = acc
    for a in range(N):
        gy += g[a] * y[a]
        fk[a] = -nu[a] * y[a] + g[a] * xs
    fx[star] += gy - gg * xs


def leapfrog(double[::1] x, double[::1] p, double[::1] y, double[::1] k,
             const double[:, ::1] K, const double[::1] inv_mass,
             const double[::1] nu, const double[::1] g,
             Py_ssize_t star, double dt, Py_ssize_t nsteps):
    """Kick-drift-kick leapfrog for the composite oscillator network, in place."""
    cdef Py_ssize_t d = x.shape[0], N = y.shape[0]
    cdef Py_ssize_t i, a, step
    cdef double h = 0.5 * dt, gg = 0.0
    cdef double[::1] fx = np.empty(d)
    cdef double[::1] fk = np.empty(N)

    if nsteps <= 0:
        return
    for a in range(N):
        gg += g[a] * g[a] / nu[a]

    with nogil:
        _forces(x, y, K, nu, g, gg, star, fx, fk)
        for step in range(nsteps):
            for i in range(d):
                p[i] += h * fx[i]
                x[i] += dt * p[i] * inv_mass[i]
            for a in range(N):
                k[a] += h * fk[a]
                y[a] += dt * nu[a] * k[a]
            _forces(x, y, K, nu, g, gg, star, fx, fk)
            for i in range(d):
                p[i] += h * fx[i]
            for a in range(N):
                k[a] += h * fk[a]


def power_iteration(const int[::1] indptr, const int[::1] indices, const double[::1] data,
                    double[::1] v0, double shift, double tol, Py_ssize_t maxiter,
                    Py_ssize_t patience=5000):
    """Shifted power iteration for a nonnegative symmetric CSR matrix.

    Returns ``(lam, v, iterations, residual)`` where ``lam`` is the Rayleigh
    quotient of the unshifted matrix and ``residual`` is the entrywise relative
    residual ``max_i |(A v - lam v)_i| / (lam |v_i|)``. Stops early once the residual
    has not improved by 1% for ``patience`` iterations (roundoff floor).
    """
    cdef Py_ssize_t n = v0.shape[0]
    cdef Py_ssize_t it = 0, i, q, best_it = 0
    cdef double best = 1e300
    cdef double[::1] v = np.array(v0, dtype=np.float64)
    cdef double[::1] u = np.empty(n)
    cdef double nrm = 0.0, rq, res, s

    for i in range(n):
        nrm += v[i] * v[i]
    nrm = sqrt(nrm)
    for i in range(n):
        v[i] /= nrm

    rq = 0.0
    res = 1.0
    with nogil:
        while True:
            rq = 0.0
            for i in range(n):
                s = 0.0
                for q in range(indptr[i], indptr[i + 1]):
                    s += data[q] * v[indices[q]]
                u[i] = s
                rq += s * v[i]
            res = 0.0
            for i in range(n):
                s = fabs(u[i] - rq * v[i])
                if s > 0.0:
                    s = s / (fabs(rq) * fabs(v[i])) if v[i] != 0.0 and rq != 0.0 else 1e300
                    if s > res:
                        res = s
            if res <= tol or it >= maxiter:
                break
            if res < 0.99 * best:
                best = res
                best_it = it
            elif it - best_it > patience:
                break
            nrm = 0.0
            for i in range(n):
                u[i] += shift * v[i]
                nrm += u[i] * u[i]
            nrm = sqrt(nrm)
            for i in range(n):
                v[i] = u[i] / nrm
            it += 1
    return rq, np.asarray(v), it, res
