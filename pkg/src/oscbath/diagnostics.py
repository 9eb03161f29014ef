"""Structure and hardness quantities of the encoding Hamiltonian, plus
dissipation observables of classical trajectories."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .model import CompositeModel

# above this D the spectral norm comes from Lanczos instead of a dense eigensolve
DENSE_NORM_MAX_D = 512


class InsufficientDataError(ValueError):
    pass


def frobenius_norm_sq(model: CompositeModel) -> float:
    """Closed form ``2 [sum K_ii/m_i + sum g^2/(m_* nu) + sum nu^2]`` in O(d + N)."""
    m = model.mass
    term_sys = float(np.sum(np.diag(model.K) / m))
    term_cpl = float(np.sum(model.g**2 / model.nu)) / m[model.star]
    term_bath = float(np.sum(model.nu**2))
    return 2.0 * (term_sys + term_cpl + term_bath)


def frobenius_norm_sq_entrywise(model: CompositeModel) -> float:
    """Sum of ``|H_ij|^2`` over the stored nonzeros of the sparse Hamiltonian."""
    H = model.hamiltonian_sparse()
    return float(np.sum(np.abs(H.data) ** 2))


def spectral_norm(model: CompositeModel) -> float:
    D = model.D
    if D <= DENSE_NORM_MAX_D:
        return float(np.max(np.abs(np.linalg.eigvalsh(model.hamiltonian()))))
    # eigenvalues come in +- pairs; ask for both ends of the magnitude spectrum
    vals = eigsh(model.hamiltonian_sparse(), k=2, which="LM", return_eigenvectors=False)
    return float(np.max(np.abs(vals)))


def stable_rank(model: CompositeModel) -> float:
    """``||H||_F^2 / ||H||^2``."""
    return frobenius_norm_sq(model) / spectral_norm(model) ** 2


def graph_edges(model: CompositeModel) -> np.ndarray:
    """Undirected edges ``(i, j)``, ``i < j``, of the graph of the Hamiltonian."""
    H = sp.triu(model.hamiltonian_sparse(), k=1).tocoo()
    keep = H.data != 0
    edges = np.stack([H.row[keep], H.col[keep]], axis=1)
    return edges[np.lexsort((edges[:, 1], edges[:, 0]))]


class _Forest:
    """Edge set with adjacency lists for path queries."""

    def __init__(self):
        self.adj: dict[int, dict[int, int]] = {}

    def add(self, e: int, a: int, b: int):
        self.adj.setdefault(a, {})[b] = e
        self.adj.setdefault(b, {})[a] = e

    def remove(self, a: int, b: int):
        del self.adj[a][b]
        del self.adj[b][a]

    def path_edges(self, a: int, b: int) -> list[int] | None:
        """Edge ids on the tree path from ``a`` to ``b``; None when disconnected."""
        if a not in self.adj or b not in self.adj:
            return None
        prev = {a: (None, None)}
        queue = [a]
        for u in queue:
            if u == b:
                break
            for w, e in self.adj[u].items():
                if w not in prev:
                    prev[w] = (u, e)
                    queue.append(w)
        if b not in prev:
            return None
        out = []
        u = b
        while prev[u][0] is not None:
            u, e = prev[u]
            out.append(e)
        return out


def forest_decomposition(n_vertices: int, edges: np.ndarray) -> list[np.ndarray]:
    """Cover ``edges`` by the minimum number of forests (matroid partition).

    Edges are inserted one at a time along shortest augmenting swap sequences;
    a new forest is opened only when no sequence exists, which certifies that
    the edges seen so far need that many forests.
    """
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    forests: list[_Forest] = []
    owner: dict[int, int] = {}

    for e0 in range(len(edges)):
        label: dict[int, tuple[int | None, int | None]] = {e0: (None, None)}
        queue = [e0]
        done = False
        for f in queue:
            a, b = edges[f]
            for i, forest in enumerate(forests):
                if owner.get(f) == i:
                    continue
                path = forest.path_edges(int(a), int(b))
                if path is None:
                    # f fits in forest i: shift each edge on the label chain
                    cur, target = f, i
                    while cur is not None:
                        old = owner.get(cur)
                        if old is not None:
                            forests[old].remove(*map(int, edges[cur]))
                        forests[target].add(cur, *map(int, edges[cur]))
                        owner[cur] = target
                        cur, target = label[cur][0], old
                    done = True
                    break
                for g in path:
                    if g not in label:
                        label[g] = (f, i)
                        queue.append(g)
            if done:
                break
        if not done:
            forest = _Forest()
            forest.add(e0, *map(int, edges[e0]))
            forests.append(forest)
            owner[e0] = len(forests) - 1

    members: list[list[int]] = [[] for _ in forests]
    for e, i in owner.items():
        members[i].append(e)
    return [edges[np.array(sorted(mem), dtype=int)].reshape(-1, 2) for mem in members]


def is_forest(n_vertices: int, edges: np.ndarray) -> bool:
    """Acyclicity by depth-first traversal: a forest has ``V - components`` edges."""
    adj: list[list[int]] = [[] for _ in range(n_vertices)]
    for a, b in edges:
        if a == b:
            return False
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n_vertices
    components = 0
    touched = set(np.unique(edges).tolist()) if len(edges) else set()
    for s in touched:
        if seen[s]:
            continue
        components += 1
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return len(edges) == len(touched) - components


@dataclass
class ArboricityCertificate:
    """Forest cover of the Hamiltonian graph; ``b`` forests bound the arboricity."""

    b: int
    formula_bound: int
    forests: list[np.ndarray] = field(repr=False)
    n_vertices: int = 0
    edges: np.ndarray = field(default=None, repr=False)

    def validate(self) -> bool:
        if any(not is_forest(self.n_vertices, f) for f in self.forests):
            return False
        covered = sorted(map(tuple, np.concatenate(self.forests).tolist())) if self.forests else []
        return covered == sorted(map(tuple, self.edges.tolist()))


def arboricity_formula(d: int) -> int:
    """Structural bound: 1 for a single primary mass, else ``min(d, ceil((d+1)/2) + 1)``."""
    if d == 1:
        return 1
    return min(d, math.ceil((d + 1) / 2) + 1)


def arboricity_bound(model: CompositeModel) -> ArboricityCertificate:
    """Certified arboricity upper bound via an explicit forest decomposition.

    The bath part of the graph (star on ``p_*`` plus the ``y-k`` matching) is
    a tree hanging off one vertex, so it is appended to the first forest and
    only the ``x-p`` block is partitioned.
    """
    edges = graph_edges(model)
    primary = np.all(edges < 2 * model.d, axis=1)
    forests = forest_decomposition(model.D, edges[primary])
    if not forests:
        forests = [np.empty((0, 2), dtype=int)]
    forests[0] = np.concatenate([forests[0], edges[~primary]])
    return ArboricityCertificate(
        b=max(1, len(forests)),
        formula_bound=arboricity_formula(model.d),
        forests=forests,
        n_vertices=model.D,
        edges=edges,
    )


def abs_norm_check(model: CompositeModel) -> tuple[float, float, float]:
    """``(||abs(H)||, ||H||, ratio)``; the ratio is 1 on trees and at most ``2b``."""
    from .qwalk import abs_norm

    a = abs_norm(model.hamiltonian_sparse())
    h = spectral_norm(model)
    return a, h, a / h


@dataclass
class DecayFit:
    gamma: float
    r2: float
    window: tuple[float, float]
    n_peaks: int


def envelope_peaks(times: np.ndarray, signal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima of ``|signal|``, refined by a parabola through three samples."""
    a = np.abs(np.asarray(signal, dtype=float))
    t = np.asarray(times, dtype=float)
    if a.size < 3:
        return np.empty(0), np.empty(0)
    y0, y1, y2 = a[:-2], a[1:-1], a[2:]
    idx = np.flatnonzero((y1 > y0) & (y1 >= y2)) + 1
    y0, y1, y2 = a[idx - 1], a[idx], a[idx + 1]
    curv = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(curv < 0, 0.5 * (y0 - y2) / curv, 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    h = t[idx + 1] - t[idx]
    return t[idx] + delta * h, y1 - 0.25 * (y0 - y2) * delta


def decay_fit(times, signal, window: tuple[float, float] | None = None, min_peaks: int = 4) -> DecayFit:
    """Exponential decay rate of the envelope of an oscillating signal.

    Fits ``log(peak) = a - gamma t`` by least squares over the envelope peaks
    inside ``window`` and returns ``gamma`` with the fit's ``r^2``.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(signal, dtype=float)
    if window is None:
        window = (float(t[0]), float(t[-1]))
    sel = (t >= window[0]) & (t <= window[1])
    pt, pv = envelope_peaks(t[sel], s[sel])
    good = pv > 0
    pt, pv = pt[good], pv[good]
    if pt.size < min_peaks:
        raise InsufficientDataError(f"found {pt.size} envelope peaks in {window}, need {min_peaks}")
    logv = np.log(pv)
    slope, intercept = np.polyfit(pt, logv, 1)
    resid = logv - (slope * pt + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    if ss_tot <= 1e-300:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return DecayFit(gamma=float(-slope), r2=r2, window=(float(window[0]), float(window[1])), n_peaks=int(pt.size))


def recurrence_time(times, energy, theta: float = 0.5, t_min: float = 0.0) -> float | None:
    """First time after ``t_min`` at which ``energy`` climbs back to ``theta * E(0)``
    having first fallen below ``theta / 2 * E(0)``; None if it never does."""
    t = np.asarray(times, dtype=float)
    e = np.asarray(energy, dtype=float)
    e0 = e[0]
    if e0 <= 0:
        return None
    low = np.flatnonzero(e < 0.5 * theta * e0)
    if low.size == 0:
        return None
    after = np.flatnonzero((np.arange(e.size) > low[0]) & (e >= theta * e0) & (t > t_min))
    return float(t[after[0]]) if after.size else None


@dataclass
class DiagnosticsReport:
    spectral_norm: float
    frobenius_norm_sq: float
    frobenius_norm_sq_entrywise: float
    abs_norm: float
    abs_ratio: float
    stable_rank: float
    arboricity_bound: int
    arboricity_formula: int
    nu_max: float
    decay: dict | None = None
    recurrence_time: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def diagnose(model: CompositeModel, times=None, x_star=None, system_energy=None, theta: float = 0.5) -> DiagnosticsReport:
    """Collect the norm, rank and graph quantities; add dissipation statistics
    when a trajectory (``times`` with ``x_star`` and/or ``system_energy``) is given."""
    a, h, ratio = abs_norm_check(model)
    frob = frobenius_norm_sq(model)
    cert = arboricity_bound(model)
    rec = None
    decay = None
    if times is not None and system_energy is not None:
        rec = recurrence_time(times, system_energy, theta)
    if times is not None and x_star is not None:
        t = np.asarray(times)
        window = (float(t[0]), rec if rec is not None else float(t[-1]))
        try:
            fit = decay_fit(t, x_star, window)
            decay = asdict(fit)
        except InsufficientDataError:
            decay = None
    return DiagnosticsReport(
        spectral_norm=h,
        frobenius_norm_sq=frob,
        frobenius_norm_sq_entrywise=frobenius_norm_sq_entrywise(model),
        abs_norm=a,
        abs_ratio=ratio,
        stable_rank=frob / h**2,
        arboricity_bound=cert.b,
        arboricity_formula=cert.formula_bound,
        nu_max=float(model.bath.nu_max),
        decay=decay,
        recurrence_time=rec,
    )
