"""Composite Caldeira-Leggett model: primary oscillators plus a harmonic bath.

State vectors are laid out as four contiguous blocks ``(x | p | y | k)`` of
sizes ``d, d, N, N``; the same layout is used for the rows of the encoding
Hamiltonian and for encoded amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

# symmetric-input rejection threshold for kappa (absolute, scaled by max|kappa|)
ASYMMETRY_TOL = 1e-12
# eigenvalues above -PSD_TOL * ||A|| are treated as zero by principal_sqrt
PSD_TOL = 1e-10


class ModelError(ValueError):
    """Invalid physical model. ``field`` names the offending input, if known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Primary system: ``d`` masses joined by springs ``kappa``.

    ``kappa[i, i]`` ties mass ``i`` to a wall; ``kappa[i, j]`` joins masses
    ``i`` and ``j``. ``star_index`` is the (0-based) mass coupled to the bath.
    """

    masses: np.ndarray
    kappa: np.ndarray
    star_index: int = 0

    def __post_init__(self):
        m = _frozen(np.atleast_1d(self.masses))
        kap = _frozen(np.atleast_2d(self.kappa))
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "kappa", kap)
        d = m.shape[0]
        if m.ndim != 1 or d < 1:
            raise ModelError("need at least one mass", "system.masses")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ModelError("masses must be finite and positive", "system.masses")
        if kap.shape != (d, d):
            raise ModelError(f"expected shape {(d, d)}, got {kap.shape}", "system.kappa")
        if not np.all(np.isfinite(kap)):
            raise ModelError("entries must be finite", "system.kappa")
        scale = max(1.0, float(np.max(np.abs(kap))))
        if np.max(np.abs(kap - kap.T)) > ASYMMETRY_TOL * scale:
            raise ModelError("spring constants must be symmetric", "system.kappa")
        if np.any(kap < 0):
            raise ModelError("spring constants must be nonnegative", "system.kappa")
        if not (0 <= int(self.star_index) < d):
            raise ModelError(f"must lie in [0, {d})", "system.star_index")
        object.__setattr__(self, "star_index", int(self.star_index))

    @property
    def d(self) -> int:
        return self.masses.shape[0]


@dataclass(frozen=True, eq=False)
class BathSpec:
    """Bath of ``N`` independent modes with frequencies ``nu`` and couplings ``g``."""

    frequencies: np.ndarray
    couplings: np.ndarray
    nu_max: float | None = None

    def __post_init__(self):
        nu = _frozen(np.atleast_1d(self.frequencies))
        g = _frozen(np.atleast_1d(self.couplings))
        object.__setattr__(self, "frequencies", nu)
        object.__setattr__(self, "couplings", g)
        if nu.ndim != 1 or nu.shape[0] < 1:
            raise ModelError("need at least one bath mode", "bath.frequencies")
        if g.shape != nu.shape:
            raise ModelError(
                f"expected {nu.shape[0]} couplings, got {g.shape}", "bath.couplings"
            )
        for a, v in enumerate(nu):
            # zero frequencies would make g/sqrt(nu) diverge
            if not np.isfinite(v) or v <= 0:
                raise ModelError(f"must be finite and > 0, got {v}", f"bath.frequencies[{a}]")
        for a, v in enumerate(g):
            if not np.isfinite(v):
                raise ModelError("must be finite", f"bath.couplings[{a}]")
        top = float(nu.max()) if self.nu_max is None else float(self.nu_max)
        if top < nu.max():
            raise ModelError("smaller than the largest bath frequency", "bath.nu_max")
        object.__setattr__(self, "nu_max", top)

    @property
    def N(self) -> int:
        return self.frequencies.shape[0]


def build_spring_matrix(spec: SystemSpec) -> np.ndarray:
    """Spring matrix with ``K_ii = sum_j kappa_ij`` and ``K_ij = -kappa_ij``.

    Raises ModelError when K is not strictly positive definite, since the
    position encoding ``sqrt(K) x`` would then lose information.
    """
    kap = spec.kappa
    K = -np.array(kap, dtype=float)
    np.fill_diagonal(K, kap.sum(axis=1))
    lam_min = np.linalg.eigvalsh(K)[0]
    if lam_min <= PSD_TOL * max(1.0, np.abs(K).max()):
        raise ModelError(
            f"spring matrix is not positive definite (smallest eigenvalue {lam_min:.3e})",
            "system.kappa",
        )
    return K


def principal_sqrt(A: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a symmetric positive semi-definite matrix."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("principal_sqrt needs a square matrix")
    w, U = np.linalg.eigh(0.5 * (A + A.T))
    scale = max(float(np.abs(w).max(initial=0.0)), np.finfo(float).tiny)
    if w[0] < -tol * scale:
        raise ValueError(f"matrix is not positive semi-definite (eigenvalue {w[0]:.3e})")
    R = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T
    return 0.5 * (R + R.T)


@dataclass(frozen=True, eq=False)
class CompositeModel:
    """Primary system plus bath, with the derived matrices of the encoding.

    Diagonal matrices are stored as vectors (``mass`` for M, ``nu`` for F) and
    the coupling matrix G by its single nonzero row ``coupling_row``.
    """

    system: SystemSpec
    bath: BathSpec
    K: np.ndarray = field(init=False, repr=False)
    sqrtK: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        K = _frozen(build_spring_matrix(self.system))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "sqrtK", _frozen(principal_sqrt(K)))

    @classmethod
    def from_arrays(cls, masses, kappa, frequencies, couplings, star_index=0, nu_max=None):
        return cls(SystemSpec(masses, kappa, star_index), BathSpec(frequencies, couplings, nu_max))

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def N(self) -> int:
        return self.bath.N

    @property
    def D(self) -> int:
        return 2 * (self.d + self.N)

    @property
    def star(self) -> int:
        return self.system.star_index

    @property
    def mass(self) -> np.ndarray:
        return self.system.masses

    @property
    def nu(self) -> np.ndarray:
        return self.bath.frequencies

    @property
    def g(self) -> np.ndarray:
        return self.bath.couplings

    @cached_property
    def M(self) -> np.ndarray:
        return np.diag(self.mass)

    @cached_property
    def F(self) -> np.ndarray:
        return np.diag(self.nu)

    @cached_property
    def coupling_row(self) -> np.ndarray:
        """Nonzero row of G: ``g_a / sqrt(nu_a)``."""
        return _frozen(self.g / np.sqrt(self.nu))

    @cached_property
    def G(self) -> np.ndarray:
        G = np.zeros((self.d, self.N))
        G[self.star] = self.coupling_row
        return G

    @cached_property
    def sqrtMinv(self) -> np.ndarray:
        return np.diag(1.0 / np.sqrt(self.mass))

    @cached_property
    def position_block(self) -> np.ndarray:
        """``sqrt(K) sqrt(M)^-1``, the x-p coupling block of the Hamiltonian."""
        return _frozen(self.sqrtK / np.sqrt(self.mass)[None, :])

    def blocks(self) -> dict[str, slice]:
        d, N = self.d, self.N
        return {
            "x": slice(0, d),
            "p": slice(d, 2 * d),
            "y": slice(2 * d, 2 * d + N),
            "k": slice(2 * d + N, 2 * d + 2 * N),
        }

    def hamiltonian(self) -> np.ndarray:
        return assemble_hamiltonian(self)

    def hamiltonian_sparse(self) -> sp.csr_matrix:
        """Sparse CSR copy of the encoding Hamiltonian (O(d^2 + N) nonzeros)."""
        upper = _upper_blocks_sparse(self)
        return (upper + upper.conj().T).tocsr()

    def kinetic_diag(self) -> np.ndarray:
        """Diagonal of the kinetic matrix for momenta ``(p, k)``: ``(1/m, nu)``."""
        return np.concatenate([1.0 / self.mass, self.nu])

    def potential_matrix(self) -> np.ndarray:
        """Dense potential matrix for positions ``(x, y)``.

        ``V = [[K + G G^T, -G sqrt(F)], [-sqrt(F) G^T, F]]``; expanding the bath
        term of the energy gives exactly this quadratic form.
        """
        d, N = self.d, self.N
        V = np.zeros((d + N, d + N))
        V[:d, :d] = self.K
        V[self.star, self.star] += float(self.coupling_row @ self.coupling_row)
        V[self.star, d:] = -self.g
        V[d:, self.star] = -self.g
        V[d:, d:] = np.diag(self.nu)
        return V


def _upper_blocks_sparse(model: CompositeModel) -> sp.coo_matrix:
    d, N, D = model.d, model.N, model.D
    rows, cols, vals = [], [], []
    xp = model.position_block
    ii, jj = np.nonzero(xp)
    rows.append(ii)
    cols.append(d + jj)
    vals.append(1j * xp[ii, jj])
    gj = np.nonzero(model.coupling_row)[0]
    rows.append(np.full(gj.shape, d + model.star))
    cols.append(2 * d + gj)
    vals.append(1j * model.coupling_row[gj] / np.sqrt(model.mass[model.star]))
    a = np.arange(N)
    rows.append(2 * d + a)
    cols.append(2 * d + N + a)
    vals.append(1j * model.nu)
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(D, D),
        dtype=complex,
    )


def assemble_hamiltonian(model: CompositeModel) -> np.ndarray:
    """Dense encoding Hamiltonian.

    Only the upper blocks are filled; the lower blocks are mirrored by
    conjugate transpose so the result is exactly Hermitian.
    """
    d, N, D = model.d, model.N, model.D
    H = np.zeros((D, D), dtype=complex)
    b = model.blocks()
    H[b["x"], b["p"]] = 1j * model.position_block
    H[d + model.star, b["y"]] = 1j * model.coupling_row / np.sqrt(model.mass[model.star])
    H[b["y"], b["k"]] = 1j * np.diag(model.nu)
    upper = np.triu(H, 1)
    return upper + upper.conj().T
