"""Bath generators for the flat (Markovian-like), band-limited and explicit regimes."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import BathSpec, ModelError

KINDS = ("uniform-flat", "band-limited", "explicit-list")


@dataclass(frozen=True)
class SpectralModel:
    """Recipe for a bath.

    ``uniform-flat`` spaces ``N`` frequencies evenly on ``(0, nu_max]``;
    ``band-limited`` spaces them evenly on ``[band[0], band[1]]``. Both use the
    same coupling ``c / sqrt(N)`` for every mode. ``explicit-list`` takes the
    frequencies and couplings verbatim.
    """

    kind: str = "uniform-flat"
    nu_max: float | None = None
    coupling_scale: float = 1.0
    band: tuple[float, float] | None = None
    frequencies: tuple[float, ...] | None = None
    couplings: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown bath kind {self.kind!r}; expected one of {KINDS}", "bath.kind")
        if self.nu_max is None:
            if self.kind != "explicit-list":
                object.__setattr__(self, "nu_max", 1.0)
        elif not self.nu_max > 0:
            raise ModelError("must be positive", "bath.nu_max")
        if not self.coupling_scale > 0:
            raise ModelError("must be positive", "bath.coupling_scale")
        if self.kind == "band-limited":
            if self.band is None or len(self.band) != 2:
                raise ModelError("band-limited bath needs [lo, hi]", "bath.band")
            lo, hi = self.band
            if not (0 < lo < hi <= self.nu_max):
                raise ModelError(f"need 0 < lo < hi <= nu_max, got {self.band}", "bath.band")
        if self.kind == "explicit-list" and (self.frequencies is None or self.couplings is None):
            raise ModelError("explicit-list bath needs frequencies and couplings", "bath")


def generate(model: SpectralModel, N: int | None = None) -> BathSpec:
    """Build a BathSpec from a spectral recipe.

    All built-in placements are deterministic; ``seed`` is carried so configs
    hash the same way regardless of kind.
    """
    if model.kind == "explicit-list":
        nu = np.asarray(model.frequencies, dtype=float)
        g = np.asarray(model.couplings, dtype=float)
        if N is not None and N != nu.shape[0]:
            raise ModelError(f"explicit list has {nu.shape[0]} modes, asked for {N}", "bath.N")
        return BathSpec(nu, g, nu_max=model.nu_max)

    if N is None or int(N) < 1:
        raise ModelError(f"need N >= 1, got {N}", "bath.N")
    N = int(N)
    if model.kind == "uniform-flat":
        # k/N is exactly 1 for the top mode, so it lands on nu_max without overshoot
        nu = np.arange(1, N + 1) / N * model.nu_max
    else:
        lo, hi = model.band
        nu = np.linspace(lo, hi, N) if N > 1 else np.array([0.5 * (lo + hi)])
    g = np.full(N, model.coupling_scale / np.sqrt(N))
    return BathSpec(nu, g, nu_max=model.nu_max)


def read_bath_csv(source: str | Path | io.TextIOBase) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``nu,g`` CSV with a single header line."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_bath_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or len(header) != 2:
        raise ModelError("bath CSV needs a two-column header line", "bath.csv")
    nu, g = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ModelError(f"line {lineno}: expected 2 columns, got {len(row)}", "bath.csv")
        try:
            nu.append(float(row[0]))
            g.append(float(row[1]))
        except ValueError as exc:
            raise ModelError(f"line {lineno}: {exc}", "bath.csv") from None
    if not nu:
        raise ModelError("no bath modes in CSV", "bath.csv")
    return np.array(nu), np.array(g)
