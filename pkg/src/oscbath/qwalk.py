"""Statevector emulation of Hamiltonian simulation by a quantum walk.

The walk lives on ``C^D (x) C^D`` with basis index ``alpha * D + beta``. For a
Hermitian ``H`` with nonnegative diagonal, the isometry ``T`` built from the
Perron vector of ``abs(H)`` satisfies ``T^dag T = I`` and
``T^dag S T = H^T / ||abs(H)||``. The walk ``W = i S (2 T T^dag - I)`` then has
eigenvalues ``exp(i s)`` and ``-exp(-i s)`` with ``s = arcsin(gamma)`` for each
eigenvalue ``gamma`` of ``H^T / ||abs(H)||``. Phase estimation on ``W``
followed by the phase ``exp(-i t ||abs(H)|| sin(theta))`` and uncomputation
applies ``exp(-i t H^T)`` on the range of ``T``.

:func:`simulate` therefore builds the walk on ``H^T`` so that the applied
propagator is ``exp(-i t H)``.
"""

from __future__ import annotations

import json
import math
import weakref
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from . import kernels
from .model import CompositeModel
from .qstate import EncodedState, decode

DEFAULT_RESOURCE_CAP = 2**22


class DisconnectedGraphError(ValueError):
    """The graph of H has several components; treat each one separately."""


class ResourceCapExceeded(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


def _abs_csr(H) -> sp.csr_matrix:
    A = sp.csr_matrix(abs(sp.csr_matrix(H)), dtype=float)
    A.eliminate_zeros()
    A.sort_indices()
    return A


def graph_components(H) -> list[np.ndarray]:
    """Vertex sets of the connected components of the graph of ``H``."""
    A = _abs_csr(H)
    n, labels = csgraph.connected_components(A, directed=False)
    return [np.flatnonzero(labels == c) for c in range(n)]


def abs_principal_eigenvector(H, tol: float = 1e-14, maxiter: int = 10**6, accept: float = 1e-11):
    """Perron pair ``(||abs(H)||, v)`` of the entrywise absolute value of ``H``.

    Uses shifted power iteration on the sparse matrix ``abs(H)``; ``v`` is
    unit-norm and strictly positive. Iteration aims for an entrywise relative
    residual ``tol`` (which bounds ``||T^dag T - I||``) and stops at the roundoff floor; a floor above ``accept`` is a
    convergence failure. Raises DisconnectedGraphError when the
    graph of ``H`` is not connected, since ``v`` would then vanish on some
    component.
    """
    A = _abs_csr(H)
    n = A.shape[0]
    if n > 1:
        ncomp, _ = csgraph.connected_components(A, directed=False)
        if ncomp > 1:
            raise DisconnectedGraphError(
                f"graph of H has {ncomp} connected components; decompose the model "
                "into its components and simulate each separately"
            )
    if A.nnz == 0:
        raise DisconnectedGraphError("H is zero; nothing to simulate")
    row_sums = np.asarray(A.sum(axis=1)).ravel()
    # row-sum bound on the Perron value; any positive shift makes it dominant
    shift = 0.5 * float(row_sums.max())
    lam, v, iters, res = kernels.power_iteration(
        A.indptr.astype(np.int32), A.indices.astype(np.int32), A.data,
        np.ones(n), shift, tol, maxiter,
    )
    if res > accept:
        raise ConvergenceError(f"power iteration stalled at residual {res:.2e} after {iters} steps")
    v = np.abs(v)
    v /= np.linalg.norm(v)
    if v.min() <= 0:
        raise ConvergenceError("Perron vector has vanishing entries")
    return float(lam), v


def build_isometry(H, Hnorm: float, v: np.ndarray) -> np.ndarray:
    """Dense ``D^2 x D`` isometry with ``T^dag S T = H^T / Hnorm``.

    Column ``alpha`` is ``sum_beta f_ab sqrt(v_b / (Hnorm v_a)) |alpha, beta>``
    with ``|f_ab|^2 = |H_ab|`` and ``f_ab conj(f_ba) = H_ab``; the phase of
    ``H_ab`` sits on the factor with ``alpha < beta``.
    """
    H = np.asarray(H.toarray() if sp.issparse(H) else H, dtype=complex)
    D = H.shape[0]
    if np.any(np.diag(H).real < 0) or np.any(np.abs(np.diag(H).imag) > 0):
        raise ValueError("diagonal of H must be real and nonnegative")
    if np.any(v <= 0):
        raise ValueError("Perron vector must be strictly positive")
    mag = np.abs(H)
    phase = np.ones_like(H)
    nz = mag > 0
    phase[nz] = H[nz] / mag[nz]
    upper = np.triu(np.ones((D, D), dtype=bool), 1)
    f = np.sqrt(mag) * np.where(upper, phase, 1.0)
    weights = np.sqrt(v[None, :] / (Hnorm * v[:, None]))
    psi = f * weights  # psi[alpha, beta]
    T = np.zeros((D * D, D), dtype=complex)
    alpha = np.arange(D)
    T[(alpha[:, None] * D + alpha[None, :]).ravel(), np.repeat(alpha, D)] = psi.ravel()
    return T


def swap_permutation(D: int) -> np.ndarray:
    """Index map of the register swap: ``(S phi)[i] = phi[perm[i]]``."""
    idx = np.arange(D * D)
    return (idx % D) * D + idx // D


def swap_operator(D: int) -> np.ndarray:
    S = np.zeros((D * D, D * D))
    S[np.arange(D * D), swap_permutation(D)] = 1.0
    return S


def walk_operator(T: np.ndarray) -> np.ndarray:
    """``W = i S (2 T T^dag - I)``.

    The factor ``i`` places the eigenvalues at ``+exp(i s)`` and ``-exp(-i s)``;
    without it they would sit at ``exp(+-i arccos(gamma))``.
    """
    n, D = T.shape
    if n != D * D:
        raise ValueError("T must map C^D into C^D (x) C^D")
    R = 2.0 * (T @ T.conj().T) - np.eye(n)
    return 1j * R[swap_permutation(D)]


def _check_cap(dim: int, phase_bits: int, cap: int):
    size = dim * 2**phase_bits
    if size > cap:
        raise ResourceCapExceeded(
            f"walk space {dim} x 2^{phase_bits} phase register = {size} amplitudes exceeds cap {cap}"
        )


def walk_powers(W: np.ndarray, phase_bits: int) -> list[np.ndarray]:
    """``[W, W^2, W^4, ..., W^(2^(p-1))]`` by repeated squaring."""
    out = [W]
    for _ in range(phase_bits - 1):
        out.append(out[-1] @ out[-1])
    return out


def _hadamard_register(state: np.ndarray, phase_bits: int) -> np.ndarray:
    # Walsh-Hadamard transform along axis 0 (register index m = sum_j b_j 2^j)
    n = state.shape[1]
    out = state.reshape((2,) * phase_bits + (n,))
    for ax in range(phase_bits):
        a = np.take(out, 0, axis=ax)
        b = np.take(out, 1, axis=ax)
        out = np.stack([a + b, a - b], axis=ax) / np.sqrt(2.0)
    return out.reshape(state.shape)


def _controlled_powers(state: np.ndarray, powers: list[np.ndarray], inverse: bool) -> np.ndarray:
    M, n = state.shape
    out = state.copy()
    order = range(len(powers) - 1, -1, -1) if inverse else range(len(powers))
    for j in order:
        U = powers[j].conj().T if inverse else powers[j]
        view = out.reshape(M // 2 ** (j + 1), 2, 2**j, n)
        view[:, 1] = view[:, 1] @ U.T
    return out


def qpe_apply(state: np.ndarray, powers: list[np.ndarray], inverse: bool = False) -> np.ndarray:
    """Apply the phase-estimation unitary Q (or Q^dag) to a joint state.

    ``state`` has shape ``(2^p, n)``: phase register along axis 0, walk space
    along axis 1. Q is Hadamards on the register, ``W^(2^j)`` controlled on
    bit ``j``, then the inverse Fourier transform of the register.
    """
    p = len(powers)
    if state.shape[0] != 2**p:
        raise ValueError("register size does not match the number of phase bits")
    if not inverse:
        out = _hadamard_register(state.astype(complex), p)
        out = _controlled_powers(out, powers, inverse=False)
        return np.fft.fft(out, axis=0, norm="ortho")
    out = np.fft.ifft(state, axis=0, norm="ortho")
    out = _controlled_powers(out, powers, inverse=True)
    return _hadamard_register(out, p)


def qpe(W: np.ndarray, phi: np.ndarray, phase_bits: int, cap: int = DEFAULT_RESOURCE_CAP) -> np.ndarray:
    """Phase estimation of ``W`` on walk state ``phi`` with a fresh register.

    Returns the joint state of shape ``(2^p, n)``; row ``k`` holds the
    component with phase estimate ``2 pi k / 2^p``.
    """
    if phase_bits < 1:
        raise ValueError("phase_bits must be >= 1")
    n = W.shape[0]
    _check_cap(n, phase_bits, cap)
    state = np.zeros((2**phase_bits, n), dtype=complex)
    state[0] = phi
    return qpe_apply(state, walk_powers(W, phase_bits))


def qpe_matrix(W: np.ndarray, phase_bits: int, cap: int = DEFAULT_RESOURCE_CAP) -> np.ndarray:
    """Dense Q on ``C^(2^p) (x) C^n`` (register-major index), for small checks."""
    n = W.shape[0]
    _check_cap(n, phase_bits, cap)
    powers = walk_powers(W, phase_bits)
    dim = n * 2**phase_bits
    basis = np.eye(dim, dtype=complex)
    cols = [qpe_apply(basis[:, c].reshape(2**phase_bits, n), powers).ravel() for c in range(dim)]
    return np.stack(cols, axis=1)


def register_angles(phase_bits: int) -> np.ndarray:
    """Phase estimate per register bin, two's complement: ``2 pi k / 2^p`` in ``[-pi, pi)``."""
    M = 2**phase_bits
    k = np.arange(M)
    k = np.where(k >= M // 2, k - M, k)
    return 2 * np.pi * k / M


def phase_oracle(state: np.ndarray, t: float, Hnorm: float = 1.0) -> np.ndarray:
    """Multiply register bin ``theta`` by ``exp(-i t Hnorm sin(theta))``.

    Both walk eigenvalues of a pair, ``exp(i s)`` and ``-exp(-i s) = exp(i (pi - s))``,
    have the same sine, so one diagonal serves both branches.
    """
    M = state.shape[0]
    p = int(round(math.log2(M)))
    phases = np.exp(-1j * t * Hnorm * np.sin(register_angles(p)))
    return state * phases.reshape((M,) + (1,) * (state.ndim - 1))


@dataclass(eq=False)
class WalkSpace:
    """Walk construction for one connected Hermitian matrix."""

    Hnorm: float
    v: np.ndarray
    T: np.ndarray
    W: np.ndarray
    _powers: list = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, H) -> "WalkSpace":
        Hnorm, v = abs_principal_eigenvector(H)
        T = build_isometry(H, Hnorm, v)
        return cls(Hnorm, v, T, walk_operator(T))

    @property
    def D(self) -> int:
        return self.T.shape[1]

    def powers(self, phase_bits: int) -> list[np.ndarray]:
        if len(self._powers) < phase_bits:
            self._powers = walk_powers(self.W, phase_bits)
        return self._powers[:phase_bits]

    def step(self, psi: np.ndarray, tau: float, phase_bits: int) -> np.ndarray:
        """One application of ``T^dag Q^dag P Q T`` (register projected onto |0>)."""
        powers = self.powers(phase_bits)
        joint = np.zeros((2**phase_bits, self.T.shape[0]), dtype=complex)
        joint[0] = self.T @ psi
        joint = qpe_apply(joint, powers)
        joint = phase_oracle(joint, tau, self.Hnorm)
        joint = qpe_apply(joint, powers, inverse=True)
        return self.T.conj().T @ joint[0]


@dataclass(frozen=True)
class PhaseConfig:
    phase_bits: int = 8
    repetitions: int = 1
    target_eps: float = 1e-2

    def __post_init__(self):
        if self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0 < self.target_eps < 1:
            raise ValueError("target_eps must lie in (0, 1)")


@dataclass
class WalkReport:
    t: float
    phase_bits: int
    segments: list[int]
    component_sizes: list[int]
    abs_norms: list[float]
    walk_queries: int
    fidelity: float
    achieved_eps: float
    target_eps: float
    converged: bool
    norm: float
    decoded_error: float
    imag_residue: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True, eq=False)
class WalkResult:
    state: EncodedState
    report: WalkReport


_WALKS: "weakref.WeakKeyDictionary[CompositeModel, list]" = weakref.WeakKeyDictionary()


def model_walks(model: CompositeModel) -> list[tuple[np.ndarray, WalkSpace]]:
    """Per-component walk spaces, built on ``H^T`` so the walk applies ``exp(-i t H)``."""
    walks = _WALKS.get(model)
    if walks is None:
        H = model.hamiltonian()
        walks = []
        for idx in graph_components(H):
            Hc = H[np.ix_(idx, idx)]
            walks.append((idx, WalkSpace.build(Hc.T)))
        _WALKS[model] = walks
    return walks


def simulate(
    model: CompositeModel,
    psi0: EncodedState,
    t: float,
    cfg: PhaseConfig = PhaseConfig(),
    resource_cap: int = DEFAULT_RESOURCE_CAP,
    reference: EncodedState | None = None,
) -> WalkResult:
    """Evolve ``psi0`` by time ``t`` through the emulated walk algorithm.

    Each connected component is handled by its own walk; its time is split
    into ``max(repetitions, ceil(||abs(H_c)|| |t|))`` equal segments. The
    report compares against exact propagation (``reference`` if given).
    """
    from .hamsim import propagate_model

    D = model.D
    if psi0.D != D:
        raise ValueError("state does not match the model")
    for idx, _ in model_walks(model):
        _check_cap(len(idx) ** 2, cfg.phase_bits, resource_cap)

    out = np.zeros(D, dtype=complex)
    segments, sizes, norms = [], [], []
    queries = 0
    for idx, ws in model_walks(model):
        nseg = max(cfg.repetitions, math.ceil(ws.Hnorm * abs(t) - 1e-12))
        tau = t / nseg
        psi = np.asarray(psi0.amplitudes[idx], dtype=complex)
        for _ in range(nseg):
            psi = ws.step(psi, tau, cfg.phase_bits)
        out[idx] = psi
        segments.append(nseg)
        sizes.append(len(idx))
        norms.append(ws.Hnorm)
        queries += nseg * 2 * (2**cfg.phase_bits - 1)

    state = psi0.replace(out, psi0.t + t)
    exact = reference if reference is not None else propagate_model(model, psi0, t)
    fidelity = float(abs(np.vdot(exact.amplitudes, out)) ** 2)
    a = decode(model, state, strict=False)
    b = decode(model, exact, strict=False)
    err = float(np.max(np.abs(np.concatenate([a.x - b.x, a.p - b.p]))))
    achieved = max(0.0, 1.0 - fidelity)
    report = WalkReport(
        t=float(t),
        phase_bits=cfg.phase_bits,
        segments=segments,
        component_sizes=sizes,
        abs_norms=norms,
        walk_queries=queries,
        fidelity=fidelity,
        achieved_eps=achieved,
        target_eps=cfg.target_eps,
        converged=achieved <= cfg.target_eps,
        norm=float(np.linalg.norm(out)),
        decoded_error=err,
        imag_residue=float(np.max(np.abs(out.imag))),
    )
    return WalkResult(state, report)


@dataclass
class ResourceReport:
    t: float
    eps: float
    arboricity: int
    nu_max: float
    spectral_norm: float
    abs_norm: float
    cost_formula: float
    cost_norm_formula: float
    repetitions: float
    segments: int
    phase_bits: int
    walk_queries: int
    walk_dim: int
    matrix_products: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def resource_estimate(model: CompositeModel, t: float, eps: float, phase_bits: int | None = None) -> ResourceReport:
    """Instantiate the cost ``b * nu_max * t / sqrt(eps)`` next to the emulation's own counts.

    ``repetitions = ||abs(H)|| t / sqrt(eps)`` is the robust-phase-estimation
    repetition count; ``cost_norm_formula`` uses ``||H||`` in place of ``nu_max``.
    """
    from . import diagnostics

    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    b = diagnostics.arboricity_bound(model).b
    Habs = abs_norm(model.hamiltonian_sparse())
    Hn = diagnostics.spectral_norm(model)
    if phase_bits is None:
        phase_bits = max(1, math.ceil(math.log2(1.0 / eps)) + 2)
    segments = max(1, math.ceil(Habs * abs(t) - 1e-12))
    queries = segments * 2 * (2**phase_bits - 1)
    return ResourceReport(
        t=float(t),
        eps=float(eps),
        arboricity=b,
        nu_max=float(model.bath.nu_max),
        spectral_norm=Hn,
        abs_norm=float(Habs),
        cost_formula=b * float(model.bath.nu_max) * abs(t) / math.sqrt(eps),
        cost_norm_formula=b * Hn * abs(t) / math.sqrt(eps),
        repetitions=Habs * abs(t) / math.sqrt(eps),
        segments=segments,
        phase_bits=phase_bits,
        walk_queries=queries,
        walk_dim=model.D**2,
        # squarings once, then two controlled-power passes per segment
        matrix_products=(phase_bits - 1) + segments * 2 * phase_bits,
    )


def abs_norm(H) -> float:
    """``||abs(H)||``, taken over connected components when the graph splits."""
    A = _abs_csr(H)
    comps = graph_components(A)
    if len(comps) == 1:
        return abs_principal_eigenvector(A)[0]
    best = 0.0
    for idx in comps:
        sub = A[idx][:, idx]
        if sub.nnz:
            best = max(best, abs_principal_eigenvector(sub)[0])
    return best
