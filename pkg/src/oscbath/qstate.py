"""Amplitude encoding of classical phase-space data and sampled readout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dynamics import PhaseState, total_energy
from .model import CompositeModel

# largest imaginary part tolerated when decoding exactly propagated states
IMAG_RESIDUE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EncodedState:
    """Normalized amplitudes over the blocks ``(x | p | y | k)``.

    ``E0`` is the energy scale of the encoding; it travels with the state as
    classical side information because decoding needs it.
    """

    amplitudes: np.ndarray
    E0: float
    d: int
    N: int
    t: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2 * (self.d + self.N),):
            raise ValueError(f"expected {2 * (self.d + self.N)} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def D(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def layout(self) -> dict[str, slice]:
        d, N = self.d, self.N
        return {
            "x": slice(0, d),
            "p": slice(d, 2 * d),
            "y": slice(2 * d, 2 * d + N),
            "k": slice(2 * d + N, 2 * (d + N)),
        }

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def replace(self, amplitudes, t: float | None = None) -> "EncodedState":
        return EncodedState(amplitudes, self.E0, self.d, self.N, self.t if t is None else t)


def unnormalized_blocks(model: CompositeModel, state: PhaseState) -> np.ndarray:
    """``(sqrt(K) x, sqrt(M)^-1 p, sqrt(F) y - G^T x, sqrt(F) k)`` before scaling."""
    sqrt_nu = np.sqrt(model.nu)
    return np.concatenate(
        [
            model.sqrtK @ state.x,
            state.p / np.sqrt(model.mass),
            sqrt_nu * state.y - model.coupling_row * state.x[model.star],
            sqrt_nu * state.k,
        ]
    )


def encode(model: CompositeModel, state: PhaseState) -> EncodedState:
    """Encode a classical state as a unit vector (scale ``1/sqrt(2 E0)``)."""
    state.check(model)
    E0 = total_energy(model, state)
    if not E0 > 0:
        raise ValueError("cannot encode a zero-energy state: normalization is undefined")
    amps = unnormalized_blocks(model, state) / np.sqrt(2.0 * E0)
    return EncodedState(amps, E0, model.d, model.N, state.t)


def decode(model: CompositeModel, psi: EncodedState, strict: bool = True) -> PhaseState:
    """Recover ``(x, p, y, k)`` from encoded amplitudes.

    With ``strict`` the imaginary part must stay below ``IMAG_RESIDUE_TOL``;
    otherwise it is discarded (used for approximate propagators).
    """
    if (psi.d, psi.N) != (model.d, model.N):
        raise ValueError("encoded state does not match the model dimensions")
    amps = psi.amplitudes
    residue = float(np.max(np.abs(amps.imag)))
    if strict and residue > IMAG_RESIDUE_TOL:
        raise ValueError(f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:g}")
    b = amps.real * np.sqrt(2.0 * psi.E0)
    L = psi.layout
    x = np.linalg.solve(model.sqrtK, b[L["x"]])
    p = b[L["p"]] * np.sqrt(model.mass)
    sqrt_nu = np.sqrt(model.nu)
    y = (b[L["y"]] + model.coupling_row * x[model.star]) / sqrt_nu
    k = b[L["k"]] / sqrt_nu
    return PhaseState(psi.t, x, p, y, k)


@dataclass(frozen=True)
class TomographyEstimate:
    """Sampled estimate of the primary amplitudes and the decoded ``(x, p)``."""

    amplitudes: np.ndarray
    amplitude_radius: np.ndarray
    x: np.ndarray
    p: np.ndarray
    x_radius: np.ndarray
    p_radius: np.ndarray
    reference: int
    shots: int | None


def _magnitude_interval(counts: np.ndarray, shots: int, z: float) -> tuple[np.ndarray, np.ndarray]:
    # Wilson score interval on each outcome probability, mapped through sqrt
    phat = counts / shots
    denom = 1.0 + z**2 / shots
    centre = (phat + z**2 / (2 * shots)) / denom
    half = z * np.sqrt(phat * (1 - phat) / shots + z**2 / (4 * shots**2)) / denom
    lo = np.sqrt(np.clip(centre - half, 0.0, 1.0))
    hi = np.sqrt(np.clip(centre + half, 0.0, 1.0))
    return lo, hi


def tomography_sample(
    model: CompositeModel,
    psi: EncodedState,
    shots: int | None,
    seed: int = 0,
    reference: int | None = None,
    confidence: float = 0.95,
) -> TomographyEstimate:
    """Emulate readout of the ``2d`` primary amplitudes from repeated measurements.

    Magnitudes come from ``shots`` computational-basis measurements over all
    ``D`` outcomes. Signs come from ``shots`` two-outcome measurements in the
    ``(e_a +- e_r)/sqrt(2)`` basis against a reference index ``r``; the
    reference's own sign and the state norm are taken as known. A requested
    reference whose estimated magnitude is below ``1/sqrt(D)`` is replaced by
    the largest estimated amplitude. ``shots=None`` reads amplitudes directly.
    """
    D = psi.D
    n_primary = 2 * psi.d
    amps = psi.amplitudes
    norm = psi.norm
    if shots is None:
        est = amps.real[:n_primary].copy()
        radius = np.zeros(n_primary)
        ref = int(np.argmax(np.abs(amps))) if reference is None else int(reference)
    else:
        shots = int(shots)
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed)
        probs = np.abs(amps) ** 2 / norm**2
        counts = rng.multinomial(shots, probs / probs.sum())
        mag = np.sqrt(counts / shots)
        order = np.argsort(-mag, kind="stable")
        ref = int(order[0]) if reference is None else int(reference)
        if mag[ref] < 1.0 / np.sqrt(D):
            ref = int(order[0])
        ref_amp = amps[ref] / norm
        ref_sign = 1.0 if ref_amp.real >= 0 else -1.0
        signs = np.empty(n_primary)
        for a in range(n_primary):
            if a == ref:
                signs[a] = ref_sign
                continue
            a_amp = amps[a] / norm
            p_plus = abs(a_amp + ref_amp) ** 2 / 2
            p_minus = abs(a_amp - ref_amp) ** 2 / 2
            rest = max(0.0, 1.0 - p_plus - p_minus)
            total = p_plus + p_minus + rest
            n_plus, n_minus, _ = rng.multinomial(shots, [p_plus / total, p_minus / total, rest / total])
            signs[a] = ref_sign * (1.0 if n_plus >= n_minus else -1.0)
        z = float(stats.norm.ppf(0.5 + confidence / 2))
        lo, hi = _magnitude_interval(counts[:n_primary], shots, z)
        m = mag[:n_primary]
        est = signs * m * norm
        radius = np.maximum(m - lo, hi - m) * norm

    scale = np.sqrt(2.0 * psi.E0)
    d = psi.d
    sqrtK_inv = np.linalg.inv(model.sqrtK)
    x = sqrtK_inv @ est[:d] * scale
    p = np.sqrt(model.mass) * est[d:] * scale
    x_rad = np.abs(sqrtK_inv) @ radius[:d] * scale
    p_rad = np.sqrt(model.mass) * radius[d:] * scale
    return TomographyEstimate(est, radius, x, p, x_rad, p_rad, ref, shots)
