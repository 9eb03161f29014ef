"""Classical oscillator networks coupled to harmonic baths: reference dynamics,
amplitude encoding, exact and quantum-walk propagation, and diagnostics."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0+local"

from .bath import SpectralModel, generate, read_bath_csv
from .dynamics import PhaseState, evolve_normal_modes, evolve_verlet, initial_state, trajectory
from .hamsim import propagate, propagate_model, spectral_decompose
from .kernels import BACKEND
from .model import BathSpec, CompositeModel, ModelError, SystemSpec
from .qstate import EncodedState, decode, encode, tomography_sample
from .qwalk import PhaseConfig, WalkSpace, resource_estimate, simulate

__all__ = [
    "BACKEND",
    "BathSpec",
    "CompositeModel",
    "EncodedState",
    "ModelError",
    "PhaseConfig",
    "PhaseState",
    "SpectralModel",
    "SystemSpec",
    "WalkSpace",
    "decode",
    "encode",
    "evolve_normal_modes",
    "evolve_verlet",
    "generate",
    "initial_state",
    "propagate",
    "propagate_model",
    "read_bath_csv",
    "resource_estimate",
    "simulate",
    "spectral_decompose",
    "tomography_sample",
    "trajectory",
]
