"""Classical reference dynamics of the composite oscillator network.

Two independent propagators are provided: exact normal-mode evolution and a
symplectic leapfrog integrator. Positions ``q = (x, y)`` and momenta
``pi = (p, k)`` obey ``dq/dt = T pi`` and ``dpi/dt = -V q`` with the diagonal
kinetic matrix ``T = diag(1/m, nu)`` and the potential matrix from
:meth:`CompositeModel.potential_matrix`.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import CompositeModel


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Phase-space snapshot: primary ``(x, p)`` and bath ``(y, k)`` at time ``t``."""

    t: float
    x: np.ndarray
    p: np.ndarray
    y: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        for name in ("x", "p", "y", "k"):
            arr = np.array(np.atleast_1d(getattr(self, name)), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"state component {name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "t", float(self.t))

    def check(self, model: CompositeModel) -> "PhaseState":
        d, N = model.d, model.N
        shapes = {"x": d, "p": d, "y": N, "k": N}
        for name, n in shapes.items():
            if getattr(self, name).shape != (n,):
                raise ValueError(
                    f"state component {name} has shape {getattr(self, name).shape}, model needs ({n},)"
                )
        return self

    def vector(self) -> np.ndarray:
        """Concatenation ``(x, p, y, k)``."""
        return np.concatenate([self.x, self.p, self.y, self.k])

    @classmethod
    def from_vector(cls, model: CompositeModel, z: np.ndarray, t: float = 0.0) -> "PhaseState":
        d, N = model.d, model.N
        z = np.asarray(z, dtype=float)
        return cls(t, z[:d], z[d : 2 * d], z[2 * d : 2 * d + N], z[2 * d + N :])

    def allclose(self, other: "PhaseState", atol: float) -> bool:
        return bool(np.max(np.abs(self.vector() - other.vector())) <= atol)


def initial_state(model: CompositeModel, x0, p0) -> PhaseState:
    """Bath at rest in its relaxed position: ``y = (g / nu) x_*``, ``k = 0``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    if x0.shape != (model.d,) or p0.shape != (model.d,):
        raise ValueError(f"x0 and p0 must have shape ({model.d},)")
    y0 = model.g / model.nu * x0[model.star]
    return PhaseState(0.0, x0, p0, y0, np.zeros(model.N))


def system_energy(model: CompositeModel, state: PhaseState) -> float:
    """Energy of the primary oscillators alone (kinetic plus spring terms)."""
    return 0.5 * float(state.p @ (state.p / model.mass) + state.x @ model.K @ state.x)


def bath_energy(model: CompositeModel, state: PhaseState) -> float:
    stretch = state.y - model.g / model.nu * state.x[model.star]
    return 0.5 * float(np.sum(model.nu * (state.k**2 + stretch**2)))


def total_energy(model: CompositeModel, state: PhaseState) -> float:
    """Conserved energy of the composite system."""
    state.check(model)
    return system_energy(model, state) + bath_energy(model, state)


def eom_rhs(model: CompositeModel, state: PhaseState) -> PhaseState:
    """Time derivative of every coordinate, returned as a PhaseState."""
    x, p, y, k = state.x, state.p, state.y, state.k
    G = model.G
    sqrt_nu = np.sqrt(model.nu)
    xdot = p / model.mass
    pdot = -model.K @ x + G @ (sqrt_nu * y - G.T @ x)
    ydot = model.nu * k
    kdot = -model.nu * y + sqrt_nu * (G.T @ x)
    return PhaseState(state.t, xdot, pdot, ydot, kdot)


class NormalModes:
    """Eigendecomposition of ``sqrt(T) V sqrt(T)`` for exact propagation."""

    def __init__(self, model: CompositeModel):
        self.model = model
        self.sqrt_T = np.sqrt(model.kinetic_diag())
        omega2, U = np.linalg.eigh(self.sqrt_T[:, None] * model.potential_matrix() * self.sqrt_T[None, :])
        if omega2[0] <= 0:
            raise np.linalg.LinAlgError("composite quadratic form is not positive definite")
        self.omega = np.sqrt(omega2)
        self.U = U

    def evolve_many(self, state: PhaseState, times) -> np.ndarray:
        """Rows ``(x, p, y, k)`` at each of ``state.t + times``."""
        model = self.model
        d = model.d
        times = np.atleast_1d(np.asarray(times, dtype=float))
        q0 = np.concatenate([state.x, state.y])
        pi0 = np.concatenate([state.p, state.k])
        a0 = self.U.T @ (q0 / self.sqrt_T)
        adot0 = self.U.T @ (self.sqrt_T * pi0)
        wt = np.outer(times, self.omega)
        c, s = np.cos(wt), np.sin(wt)
        a = c * a0 + s * (adot0 / self.omega)
        adot = -s * (a0 * self.omega) + c * adot0
        q = (a @ self.U.T) * self.sqrt_T
        pi = (adot @ self.U.T) / self.sqrt_T
        return np.hstack([q[:, :d], pi[:, :d], q[:, d:], pi[:, d:]])


_MODES: "weakref.WeakKeyDictionary[CompositeModel, NormalModes]" = weakref.WeakKeyDictionary()


def normal_modes(model: CompositeModel) -> NormalModes:
    modes = _MODES.get(model)
    if modes is None:
        modes = _MODES[model] = NormalModes(model)
    return modes


def evolve_normal_modes(model: CompositeModel, state: PhaseState, t: float) -> PhaseState:
    """Exact evolution of ``state`` by a further time ``t``."""
    state.check(model)
    row = normal_modes(model).evolve_many(state, [t])[0]
    return PhaseState.from_vector(model, row, state.t + t)


def trajectory(model: CompositeModel, state: PhaseState, times) -> np.ndarray:
    """Exact states at the absolute ``times`` as rows ``(x, p, y, k)``."""
    state.check(model)
    return normal_modes(model).evolve_many(state, np.asarray(times, dtype=float) - state.t)


def evolve_verlet(model: CompositeModel, state: PhaseState, t: float, dt: float) -> PhaseState:
    """Leapfrog evolution by time ``t`` with step at most ``dt``.

    The step is shrunk so that a whole number of steps lands exactly on ``t``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    state.check(model)
    nsteps = int(np.ceil(abs(t) / dt - 1e-9)) if t != 0 else 0
    x, p, y, k = (np.array(a, dtype=float) for a in (state.x, state.p, state.y, state.k))
    if nsteps:
        h = t / nsteps
        kernels.leapfrog(
            x, p, y, k,
            np.ascontiguousarray(model.K), 1.0 / model.mass,
            np.ascontiguousarray(model.nu), np.ascontiguousarray(model.g),
            model.star, h, nsteps,
        )
    return PhaseState(state.t + t, x, p, y, k)
