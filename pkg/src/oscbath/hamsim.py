"""Exact propagation ``exp(-i H t)`` through the eigendecomposition of H."""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .model import CompositeModel
from .qstate import EncodedState

# dense decomposition is only an oracle; refuse anything larger
MAX_DENSE_DIM = 4096


class HamiltonianTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralData:
    """``H = V diag(eigenvalues) V^dagger``."""

    V: np.ndarray
    eigenvalues: np.ndarray

    @property
    def D(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.V * self.eigenvalues) @ self.V.conj().T

    def propagator(self, t: float) -> np.ndarray:
        return (self.V * np.exp(-1j * self.eigenvalues * t)) @ self.V.conj().T


def spectral_decompose(H: np.ndarray) -> SpectralData:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("Hamiltonian must be square")
    if H.shape[0] > MAX_DENSE_DIM:
        raise HamiltonianTooLarge(
            f"dense decomposition capped at D <= {MAX_DENSE_DIM}, got D = {H.shape[0]}"
        )
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    if np.abs(H - H.conj().T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("Hamiltonian is not Hermitian")
    w, V = np.linalg.eigh(H)
    return SpectralData(V, w)


_CACHE: "weakref.WeakKeyDictionary[CompositeModel, SpectralData]" = weakref.WeakKeyDictionary()


def model_spectrum(model: CompositeModel) -> SpectralData:
    sd = _CACHE.get(model)
    if sd is None:
        sd = _CACHE[model] = spectral_decompose(model.hamiltonian())
    return sd


def propagate(sd: SpectralData, psi: EncodedState, t: float) -> EncodedState:
    """Apply ``V exp(-i D t) V^dagger`` to the encoded state."""
    if psi.D != sd.D:
        raise ValueError(f"state has dimension {psi.D}, Hamiltonian {sd.D}")
    coeff = sd.V.conj().T @ psi.amplitudes
    out = sd.V @ (np.exp(-1j * sd.eigenvalues * t) * coeff)
    return psi.replace(out, psi.t + t)


def propagate_model(model: CompositeModel, psi: EncodedState, t: float) -> EncodedState:
    return propagate(model_spectrum(model), psi, t)
