"""Command-line front end: parse a JSON run config, run one mode, write artifacts.

Verbs::

    oscbath run config.json
    oscbath diagnose config.json
    oscbath sweep config.json --param model.bath.coupling_scale --values 0.1,0.2

Every invocation writes a trajectory CSV and/or report JSON plus a manifest
JSON. Identical (config, seed) pairs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import platform
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels
from .bath import SpectralModel, generate, read_bath_csv
from .dynamics import PhaseState, evolve_verlet, initial_state, system_energy, total_energy, trajectory
from .model import BathSpec, CompositeModel, ModelError, SystemSpec

MODES = ("reference", "exact", "walk", "diagnose", "sweep")
POINT_MODES = MODES[:4]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

_NUM = {"type": "number"}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "initial", "run"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["system", "bath"],
            "properties": {
                "system": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["masses", "kappa"],
                    "properties": {
                        "masses": _NUM_LIST,
                        "kappa": {"type": "array", "items": _NUM_LIST, "minItems": 1},
                        "star_index": {"type": "integer", "minimum": 0},
                    },
                },
                "bath": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["uniform-flat", "band-limited", "explicit-list"]},
                        "N": {"type": "integer", "minimum": 1},
                        "nu_max": _POS,
                        "coupling_scale": _POS,
                        "band": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                        "frequencies": _NUM_LIST,
                        "couplings": _NUM_LIST,
                        "file": {"type": "string"},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x0"],
            "properties": {"x0": _NUM_LIST, "p0": _NUM_LIST},
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode", "t_final", "sample_dt"],
            "properties": {
                "mode": {"enum": list(MODES)},
                "t_final": _POS,
                "sample_dt": _POS,
                "eps": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "phase_bits": {"type": "integer", "minimum": 1, "maximum": 16},
                "repetitions": {"type": "integer", "minimum": 1},
                "shots": {"type": ["integer", "null"], "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "integrator": {"enum": ["normal-modes", "verlet"]},
                "dt": _POS,
                "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "resource_cap": {"type": "integer", "minimum": 1},
                "sweep": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["param", "values"],
                    "properties": {
                        "param": {"type": "string"},
                        "values": {"type": "array", "minItems": 1},
                        "mode": {"enum": list(POINT_MODES)},
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "prefix": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
                "emit_bath": {"type": "boolean"},
            },
        },
    },
}


class ConfigError(ValueError):
    """Config rejected; the message starts with the offending field path."""


@dataclass(frozen=True)
class RunSection:
    mode: str
    t_final: float
    sample_dt: float
    eps: float = 1e-2
    phase_bits: int = 8
    repetitions: int = 1
    shots: int | None = None
    seed: int = 0
    integrator: str = "normal-modes"
    dt: float = 1e-3
    theta: float = 0.5
    resource_cap: int = 2**22
    sweep: dict | None = None


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    prefix: str = "run"
    emit_bath: bool = False


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated config. ``raw`` is the canonical JSON object that gets hashed."""

    model: CompositeModel
    recipe: SpectralModel
    x0: np.ndarray
    p0: np.ndarray
    run: RunSection
    output: OutputSection
    raw: dict = field(repr=False)
    base_dir: Path = Path(".")

    @property
    def recorded(self) -> dict:
        """``raw`` without the output location, which does not affect results."""
        rec = copy.deepcopy(self.raw)
        rec.get("output", {}).pop("dir", None)
        return rec

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.recorded).encode()).hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ConfigError(f"duplicate key {key!r}")
        out[key] = value
    return out


def load_json(text: str) -> dict:
    try:
        obj = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError("top level must be a JSON object")
    return obj


def _path_str(parts) -> str:
    s = ""
    for p in parts:
        s += f"[{p}]" if isinstance(p, int) else (f".{p}" if s else str(p))
    return s or "<root>"


def validate_schema(raw: dict):
    errors = sorted(
        jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw),
        key=lambda e: (len(e.absolute_path), _path_str(e.absolute_path)),
    )
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(f"{_path_str(err.absolute_path)}: {err.message}")


def _build_recipe(bath: dict, base_dir: Path) -> tuple[SpectralModel, int | None]:
    kind = bath["kind"]
    freqs = bath.get("frequencies")
    coups = bath.get("couplings")
    if "file" in bath:
        if kind != "explicit-list":
            raise ConfigError("model.bath.file: only valid for explicit-list baths")
        if freqs is not None or coups is not None:
            raise ConfigError("model.bath.file: give either a file or inline lists, not both")
        path = (base_dir / bath["file"]).resolve()
        if not path.is_file():
            raise ConfigError(f"model.bath.file: no such file {bath['file']!r}")
        try:
            freqs, coups = read_bath_csv(path)
        except (ValueError, ModelError) as exc:
            raise ConfigError(f"model.bath.file: {exc}") from None
    try:
        recipe = SpectralModel(
            kind=kind,
            nu_max=bath.get("nu_max"),
            coupling_scale=bath.get("coupling_scale", 1.0),
            band=tuple(bath["band"]) if "band" in bath else None,
            frequencies=None if freqs is None else tuple(float(v) for v in freqs),
            couplings=None if coups is None else tuple(float(v) for v in coups),
            seed=bath.get("seed", 0),
        )
    except ModelError as exc:
        raise ConfigError(f"model.{exc}") from None
    if kind != "explicit-list" and "N" not in bath:
        raise ConfigError(f"model.bath.N: required for {kind} baths")
    return recipe, bath.get("N")


def config_from_dict(raw: dict, base_dir: str | Path = ".") -> RunConfig:
    """Validate an already-parsed config object and build the model."""
    validate_schema(raw)
    base_dir = Path(base_dir)
    m = raw["model"]
    recipe, N = _build_recipe(m["bath"], base_dir)
    try:
        system = SystemSpec(m["system"]["masses"], m["system"]["kappa"], m["system"].get("star_index", 0))
        bath = generate(recipe, N)
        model = CompositeModel(system, bath)
    except ModelError as exc:
        raise ConfigError(f"model.{exc}") from None

    init = raw["initial"]
    x0 = np.array(init["x0"], dtype=float)
    p0 = np.array(init.get("p0", [0.0] * model.d), dtype=float)
    for name, v in (("x0", x0), ("p0", p0)):
        if v.shape != (model.d,):
            raise ConfigError(f"initial.{name}: expected {model.d} values, got {v.shape[0]}")

    run = RunSection(**raw["run"])
    if run.sample_dt > run.t_final:
        raise ConfigError("run.sample_dt: larger than run.t_final")
    if run.mode == "sweep" and run.sweep is None:
        raise ConfigError("run.sweep: required when run.mode is 'sweep'")
    out = OutputSection(**raw.get("output", {}))
    return RunConfig(model, recipe, x0, p0, run, out, raw, base_dir)


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    """Parse and validate JSON config text. Unknown and duplicate keys are rejected."""
    return config_from_dict(load_json(text), base_dir)


# ---------------------------------------------------------------- sweep paths

_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)((?:\[\d+\])*)$")


def _split_path(path: str) -> list:
    parts = []
    for tok in path.split("."):
        m = _TOKEN.match(tok)
        if not m:
            raise ConfigError(f"{path}: not a valid parameter path")
        parts.append(m.group(1))
        parts.extend(int(i) for i in re.findall(r"\[(\d+)\]", m.group(2)))
    return parts


def set_param(raw: dict, path: str, value) -> dict:
    """Copy of ``raw`` with the scalar at dotted ``path`` replaced by ``value``."""
    if isinstance(value, (dict, list)) or value is None:
        raise ConfigError(f"{path}: sweep values must be scalars, got {value!r}")
    parts = _split_path(path)
    out = copy.deepcopy(raw)
    node = out
    for i, key in enumerate(parts[:-1]):
        try:
            node = node[key]
        except (KeyError, IndexError, TypeError):
            raise ConfigError(f"{_path_str(parts[: i + 1])}: not present in the config") from None
    last = parts[-1]
    if isinstance(node, list):
        if not isinstance(last, int) or last >= len(node):
            raise ConfigError(f"{path}: index out of range")
    elif not isinstance(node, dict) or isinstance(last, int):
        raise ConfigError(f"{path}: not a field")
    existing = node[last] if isinstance(node, list) else node.get(last)
    if isinstance(existing, (dict, list)):
        raise ConfigError(f"{path}: only scalar fields can be swept")
    node[last] = value
    return out


def derived_seed(base_seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{int(base_seed)}:{int(index)}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


# ---------------------------------------------------------------- emission

def fmt(v: float) -> str:
    return format(float(v), ".17g")


def sample_times(t_final: float, sample_dt: float) -> np.ndarray:
    n = int(math.floor(t_final / sample_dt * (1 + 1e-12)))
    times = np.arange(n + 1) * sample_dt
    if t_final - times[-1] > 1e-9 * t_final:
        times = np.append(times, t_final)
    return times


def csv_header(d: int, N: int, emit_bath: bool) -> list[str]:
    cols = ["t"] + [f"x_{i}" for i in range(1, d + 1)] + [f"p_{i}" for i in range(1, d + 1)]
    cols += ["E_S", "E_total"]
    if emit_bath:
        cols += [f"y_{a}" for a in range(1, N + 1)] + [f"k_{a}" for a in range(1, N + 1)]
    return cols


def write_csv(path: Path, header: list[str], rows: np.ndarray):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions() -> dict:
    import scipy

    from . import __version__

    return {
        "oscbath": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": kernels.BACKEND,
    }


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, obj):
    path.write_text(json.dumps(_json_ready(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


# ---------------------------------------------------------------- modes

def _rows(model: CompositeModel, times, states: list[PhaseState], emit_bath: bool) -> np.ndarray:
    rows = []
    for t, s in zip(times, states):
        row = [t, *s.x, *s.p, system_energy(model, s), total_energy(model, s)]
        if emit_bath:
            row += [*s.y, *s.k]
        rows.append(row)
    return np.array(rows, dtype=float)


def _reference_states(cfg: RunConfig, times) -> list[PhaseState]:
    model = cfg.model
    s0 = initial_state(model, cfg.x0, cfg.p0)
    if cfg.run.integrator == "verlet":
        states, cur = [s0], s0
        for t in times[1:]:
            cur = evolve_verlet(model, cur, t - cur.t, cfg.run.dt)
            states.append(PhaseState(t, cur.x, cur.p, cur.y, cur.k))
            cur = states[-1]
        return states
    Z = trajectory(model, s0, times)
    return [PhaseState.from_vector(model, z, t) for t, z in zip(times, Z)]


def _max_dev(a: list[PhaseState], b: list[PhaseState]) -> float:
    return float(max(np.max(np.abs(u.vector() - v.vector())) for u, v in zip(a, b)))


def _apply_shots(cfg: RunConfig, psi, state: PhaseState, index: int):
    from .qstate import tomography_sample

    est = tomography_sample(cfg.model, psi, cfg.run.shots, seed=derived_seed(cfg.run.seed, index))
    radius = float(max(np.max(est.x_radius), np.max(est.p_radius)))
    return PhaseState(state.t, est.x, est.p, state.y, state.k), radius


def run_reference(cfg: RunConfig, times):
    states = _reference_states(cfg, times)
    E = np.array([total_energy(cfg.model, s) for s in states])
    drift = float(np.max(np.abs(E - E[0])) / E[0]) if E[0] > 0 else 0.0
    report = {"integrator": cfg.run.integrator, "E0": float(E[0]), "max_relative_energy_drift": drift}
    if cfg.run.integrator == "verlet":
        report["dt"] = cfg.run.dt
    return states, report, {"max_relative_energy_drift": drift}


def run_exact(cfg: RunConfig, times):
    from .hamsim import model_spectrum, propagate
    from .qstate import decode, encode

    model = cfg.model
    ref = _reference_states(cfg, times)
    psi0 = encode(model, ref[0])
    sd = model_spectrum(model)
    states, residues, norms, radii = [], [], [], []
    for i, t in enumerate(times):
        psi = propagate(sd, psi0, t)
        residues.append(float(np.max(np.abs(psi.amplitudes.imag))))
        norms.append(abs(psi.norm - 1.0))
        s = decode(model, psi, strict=True)
        if cfg.run.shots is not None:
            s, r = _apply_shots(cfg, psi, s, i)
            radii.append(r)
        states.append(s)
    exact_states = states if cfg.run.shots is None else [decode(model, propagate(sd, psi0, t)) for t in times]
    dev = _max_dev(exact_states, ref)
    tol = {"max_deviation_from_reference": dev, "max_imag_residue": max(residues), "max_norm_drift": max(norms)}
    report = {"E0": psi0.E0, **tol}
    if radii:
        report["shots"] = cfg.run.shots
        report["max_readout_radius"] = max(radii)
        tol["max_readout_radius"] = max(radii)
    return states, report, tol


def run_walk(cfg: RunConfig, times):
    from .hamsim import model_spectrum, propagate
    from .qstate import decode, encode
    from .qwalk import PhaseConfig, resource_estimate, simulate

    model = cfg.model
    s0 = initial_state(model, cfg.x0, cfg.p0)
    psi0 = encode(model, s0)
    sd = model_spectrum(model)
    pcfg = PhaseConfig(phase_bits=cfg.run.phase_bits, repetitions=cfg.run.repetitions, target_eps=cfg.run.eps)
    # readout is destructive, so every sample time is an independent run from psi0
    states, samples, radii = [], [], []
    for i, t in enumerate(times):
        res = simulate(model, psi0, float(t), pcfg, cfg.run.resource_cap, reference=propagate(sd, psi0, t))
        s = decode(model, res.state, strict=False)
        if cfg.run.shots is not None:
            s, r = _apply_shots(cfg, res.state, s, i)
            radii.append(r)
        states.append(s)
        samples.append(asdict(res.report))
    worst_eps = max(r["achieved_eps"] for r in samples)
    tol = {
        "max_achieved_eps": worst_eps,
        "min_fidelity": min(r["fidelity"] for r in samples),
        "max_decoded_error": max(r["decoded_error"] for r in samples),
    }
    report = {
        "E0": psi0.E0,
        "phase_bits": cfg.run.phase_bits,
        "target_eps": cfg.run.eps,
        "best_effort": worst_eps > cfg.run.eps,
        **tol,
        "resources": asdict(resource_estimate(model, cfg.run.t_final, cfg.run.eps, cfg.run.phase_bits)),
        "samples": samples,
    }
    if radii:
        report["shots"] = cfg.run.shots
        tol["max_readout_radius"] = max(radii)
    tol["best_effort"] = report["best_effort"]
    return states, report, tol


def run_diagnose(cfg: RunConfig, times):
    from .diagnostics import diagnose

    states = _reference_states(cfg, times)
    star = cfg.model.star
    x_star = np.array([s.x[star] for s in states])
    E_S = np.array([system_energy(cfg.model, s) for s in states])
    rep = asdict(diagnose(cfg.model, times, x_star, E_S, cfg.run.theta))
    tol = {"frobenius_closed_form_gap": abs(rep["frobenius_norm_sq"] - rep["frobenius_norm_sq_entrywise"])}
    return states, rep, tol


RUNNERS = {"reference": run_reference, "exact": run_exact, "walk": run_walk, "diagnose": run_diagnose}


def execute(cfg: RunConfig, out_dir: Path, mode: str | None = None) -> dict:
    """Run one point and write ``<prefix>.csv``, ``_report.json`` and ``_manifest.json``."""
    mode = mode or cfg.run.mode
    if mode == "sweep":
        return execute_sweep(cfg, cfg.run.sweep["param"], cfg.run.sweep["values"], out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    times = sample_times(cfg.run.t_final, cfg.run.sample_dt)
    states, report, tol = RUNNERS[mode](cfg, times)
    prefix = cfg.output.prefix
    csv_path = out_dir / f"{prefix}.csv"
    report_path = out_dir / f"{prefix}_report.json"
    write_csv(csv_path, csv_header(cfg.model.d, cfg.model.N, cfg.output.emit_bath), _rows(cfg.model, times, states, cfg.output.emit_bath))
    write_json(report_path, {"mode": mode, "d": cfg.model.d, "N": cfg.model.N, "samples": len(times), **report})
    manifest = {
        "mode": mode,
        "config_hash": cfg.config_hash,
        "config": cfg.recorded,
        "seed": cfg.run.seed,
        "versions": _versions(),
        "achieved_tolerances": tol,
        "artifacts": {p.name: _sha256(p) for p in (csv_path, report_path)},
    }
    write_json(out_dir / f"{prefix}_manifest.json", manifest)
    return manifest


def _sweep_point(args):
    raw, base_dir, out_dir, mode = args
    cfg = config_from_dict(raw, base_dir)
    manifest = execute(cfg, Path(out_dir), mode)
    return manifest["config_hash"], manifest["artifacts"]


def execute_sweep(cfg: RunConfig, param: str, values: list, out_dir: Path, jobs: int = 1) -> dict:
    """One run per value of ``param``; point ``i`` gets seed ``derived_seed(seed, i)``."""
    mode = (cfg.run.sweep or {}).get("mode", "reference")
    if cfg.run.mode != "sweep":
        mode = cfg.run.mode
    points = []
    for i, value in enumerate(values):
        raw = set_param(cfg.raw, param, value)
        raw["run"]["seed"] = derived_seed(cfg.run.seed, i)
        raw["run"]["mode"] = mode
        raw["run"].pop("sweep", None)
        config_from_dict(raw, cfg.base_dir)  # fail before any point runs
        points.append((raw, str(cfg.base_dir), str(out_dir / f"point_{i:03d}"), mode))
    out_dir.mkdir(parents=True, exist_ok=True)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]
    summary = {
        "param": param,
        "mode": mode,
        "points": [
            {"index": i, "value": v, "seed": p[0]["run"]["seed"], "dir": Path(p[2]).name, "config_hash": h, "artifacts": a}
            for i, (v, p, (h, a)) in enumerate(zip(values, points, results))
        ],
    }
    summary_path = out_dir / f"{cfg.output.prefix}_sweep.json"
    write_json(summary_path, summary)
    manifest = {
        "mode": "sweep",
        "config_hash": cfg.config_hash,
        "config": cfg.recorded,
        "seed": cfg.run.seed,
        "versions": _versions(),
        "achieved_tolerances": {},
        "artifacts": {summary_path.name: _sha256(summary_path)},
    }
    write_json(out_dir / f"{cfg.output.prefix}_manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------- entry point

def _scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_values(text: str) -> list:
    text = text.strip()
    if text.startswith("["):
        vals = load_json(f'{{"v": {text}}}')["v"]
    else:
        vals = [_scalar(v.strip()) for v in text.split(",")]
    if not vals:
        raise ConfigError("--values: empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscbath", description="Oscillator-bath simulation runs")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("config", type=Path, help="JSON run config")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--out-dir", type=Path, help="override output.dir")
        p.add_argument("--emit-bath", action="store_true", help="append y_a, k_a columns to the CSV")
        p.add_argument("--resource-cap", type=int, help="walk mode: cap on D^2 * 2^phase_bits")

    common(sub.add_parser("run", help="run the mode named in the config"))
    common(sub.add_parser("diagnose", help="norm, rank, arboricity and dissipation report"))
    sw = sub.add_parser("sweep", help="run once per value of one scalar config field")
    common(sw)
    sw.add_argument("--param", required=True, help="dotted path, e.g. model.bath.coupling_scale")
    sw.add_argument("--values", required=True, help="comma list or JSON array")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _apply_overrides(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    run = raw.get("run")
    if isinstance(run, dict):
        if args.seed is not None:
            run["seed"] = args.seed
        if args.resource_cap is not None:
            run["resource_cap"] = args.resource_cap
    if args.out_dir is not None or args.emit_bath:
        out = raw.setdefault("output", {})
        if isinstance(out, dict):
            if args.out_dir is not None:
                out["dir"] = str(args.out_dir)
            if args.emit_bath:
                out["emit_bath"] = True
    return raw


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    from .qwalk import ResourceCapExceeded

    try:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"{args.config}: {exc.strerror}") from None
        raw = _apply_overrides(load_json(text), args)
        cfg = config_from_dict(raw, args.config.parent)
        out_dir = Path(cfg.output.dir)
        if not out_dir.is_absolute() and args.out_dir is None:
            out_dir = args.config.parent / out_dir
        if args.verb == "diagnose":
            manifest = execute(cfg, out_dir, "diagnose")
        elif args.verb == "sweep":
            manifest = execute_sweep(cfg, args.param, _parse_values(args.values), out_dir, args.jobs)
        else:
            manifest = execute(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapExceeded as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Exception as exc:  # any other failure still yields a nonzero exit
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps({"out_dir": str(out_dir), "artifacts": sorted(manifest["artifacts"])}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
