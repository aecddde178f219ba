"""Detector-angle grid sweeps, dynamics runs, oracle checks and file output."""
from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .correlations import (
    csi,
    fringe_period_ratio,
    g2_chain,
    g2_strong_central_single_detector,
    g2_weak_field,
)
from .dynamics import (
    TwoAtomState,
    coefficients,
    evolve,
    residual,
    steady_state,
    write_trajectory_csv,
)
from .oracle import MAX_ATOMS, CapacityError, OracleReport, oracle_sweep_report
from .params import (
    BAND_PAIRS,
    ChainGeometry,
    DressedParams,
    InvalidParameterError,
    collective_coupling,
    detection_phase,
    pair_label,
    parse_pair,
)

MODES = ("map", "csi", "dynamics", "oracle-check", "resolution")
FORMATS = ("csv", "json")
ALL_PAIRS = [pair_label(p) for p in BAND_PAIRS]


class ConfigError(ValueError):
    """Invalid sweep configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class SweepConfig:
    mode: str = "map"
    n_atoms: int = 2
    spacing: float = 5.0
    pairs: list[str] = field(default_factory=lambda: list(ALL_PAIRS))
    grid1: tuple[float, float, int] = (0.0, math.pi, 101)
    grid2: tuple[float, float, int] = (0.0, math.pi, 101)
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    # dynamics
    rabi: float = 100.0
    detuning: float = 0.0
    gammas: tuple[float, float, float] = (1.0, 1.0, 1.0)
    coupling: str = "perpendicular"
    t_end: float = 50.0
    dt: float = 0.01
    initial: tuple[float, float, float] = (-2.0, 0.0, 1.0)
    # resolution
    saturation: float = 0.5
    profile_steps: int = 2001
    # oracle-check
    n_range: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    delta_steps: int = 21

    def validate(self) -> "SweepConfig":
        if self.mode not in MODES:
            raise ConfigError("mode", f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"expected one of {FORMATS}, got {self.format!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError("workers", "must be an integer >= 1")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 2:
            raise ConfigError("n_atoms", "must be an integer >= 2")
        if not self.spacing > 0:
            raise ConfigError("spacing", "must be > 0")
        for name in ("grid1", "grid2"):
            lo, hi, steps = getattr(self, name)
            if int(steps) != steps or steps < 2:
                raise ConfigError(name, "steps must be an integer >= 2")
            if not (0.0 <= lo <= hi <= math.pi):
                raise ConfigError(name, "angle range must satisfy 0 <= min <= max <= pi")
        if not self.pairs:
            raise ConfigError("pairs", "at least one band pair is required")
        for p in self.pairs:
            try:
                parse_pair(p)
            except InvalidParameterError as exc:
                raise ConfigError("pairs", str(exc)) from None
        if self.mode == "dynamics":
            if not self.dt > 0:
                raise ConfigError("dt", "must be > 0")
            if self.t_end < 0:
                raise ConfigError("t_end", "must be >= 0")
        if self.mode == "resolution":
            if not self.saturation > 0:
                raise ConfigError("saturation", "Omega/gamma must be > 0")
            if self.profile_steps < 3:
                raise ConfigError("profile_steps", "must be >= 3")
        if self.mode == "oracle-check" and self.delta_steps < 1:
            raise ConfigError("delta_steps", "must be >= 1")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
            if key in ("grid1", "grid2"):
                if isinstance(value, str):
                    value = parse_grid(value)
                lo, hi, steps = value
                value = (float(lo), float(hi), int(steps))
            elif key in ("gammas", "initial"):
                value = tuple(float(v) for v in value)
                if len(value) != 3:
                    raise ConfigError(key, "expects three numbers")
            elif key == "pairs":
                value = [value] if isinstance(value, str) else list(value)
                value = [pair_label(p) for p in value]
            elif key == "n_range":
                value = [int(v) for v in value]
            kwargs[key] = value
        return cls(**kwargs)


def parse_grid(text: str) -> tuple[float, float, int]:
    """Parse ``min:max:steps``; ``pi`` is accepted as a factor, e.g. ``0:pi:201``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("grid", f"expected min:max:steps, got {text!r}")

    def num(s: str) -> float:
        s = s.strip().lower()
        if "pi" in s:
            head = s.replace("*", "").replace("pi", "")
            if "/" in head:
                a, b = head.split("/")
                return (float(a) if a else 1.0) * math.pi / float(b)
            return (float(head) if head else 1.0) * math.pi
        return float(s)

    try:
        lo, hi = num(parts[0]), num(parts[1])
        steps = int(parts[2])
    except ValueError:
        raise ConfigError("grid", f"cannot parse {text!r}") from None
    return lo, hi, steps


def load_config(path) -> SweepConfig:
    with open(path) as fh:
        return SweepConfig.from_dict(json.load(fh))


@dataclass
class GridResult:
    alpha1: np.ndarray
    alpha2: np.ndarray
    values: dict[str, np.ndarray]
    metadata: dict[str, Any]


# -- parallel grid evaluation -------------------------------------------------

def _row_values(quantity: str, n_atoms: int, spacing: float, a1: float, alpha2: np.ndarray) -> np.ndarray:
    geometry = ChainGeometry(n_atoms, spacing)
    d1 = detection_phase(geometry, a1)
    d2 = detection_phase(geometry, alpha2)
    if quantity == "csi":
        return np.asarray(csi(n_atoms, d1, d2)[0], dtype=float)
    return np.asarray(g2_chain(quantity, n_atoms, d1, d2), dtype=float)


def _block(args) -> tuple[int, np.ndarray]:
    quantity, n_atoms, spacing, start, alpha1_block, alpha2 = args
    rows = [_row_values(quantity, n_atoms, spacing, a1, alpha2) for a1 in alpha1_block]
    return start, np.vstack(rows)


def evaluate_grid(quantity: str, n_atoms: int, spacing: float,
                  alpha1: np.ndarray, alpha2: np.ndarray, workers: int = 1) -> np.ndarray:
    """Value matrix ``out[i, j] = f(alpha1[i], alpha2[j])``.

    Rows are the unit of work, so each cell's arithmetic is identical whatever
    the worker count.
    """
    n_rows = len(alpha1)
    workers = max(1, min(int(workers), n_rows))
    bounds = np.linspace(0, n_rows, workers + 1).astype(int)
    tasks = [
        (quantity, n_atoms, spacing, int(bounds[i]), alpha1[bounds[i]:bounds[i + 1]], alpha2)
        for i in range(workers)
        if bounds[i + 1] > bounds[i]
    ]
    out = np.empty((n_rows, len(alpha2)))
    if workers == 1:
        results = map(_block, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_block, tasks)
    try:
        for start, block in results:
            out[start:start + block.shape[0]] = block
    finally:
        if workers > 1:
            pool.shutdown()
    return out


def _axes(config: SweepConfig) -> tuple[np.ndarray, np.ndarray]:
    lo1, hi1, n1 = config.grid1
    lo2, hi2, n2 = config.grid2
    return np.linspace(lo1, hi1, int(n1)), np.linspace(lo2, hi2, int(n2))


def _metadata(config: SweepConfig, **extra) -> dict[str, Any]:
    meta = {
        "config": config.to_dict(),
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    meta.update(extra)
    return meta


def _stats(mat: np.ndarray) -> dict[str, float]:
    return {"min": float(mat.min()), "max": float(mat.max())}


def run_map(config: SweepConfig) -> GridResult:
    config.validate()
    a1, a2 = _axes(config)
    values, stats = {}, {}
    for p in config.pairs:
        label = pair_label(p)
        mat = evaluate_grid(label, config.n_atoms, config.spacing, a1, a2, config.workers)
        if not np.all(np.isfinite(mat)):
            raise ArithmeticError(f"non-finite values in {label} map")
        values[label] = mat
        stats[label] = _stats(mat)
    return GridResult(a1, a2, values, _metadata(config, stats=stats))


def run_csi(config: SweepConfig) -> GridResult:
    config.validate()
    a1, a2 = _axes(config)
    mat = evaluate_grid("csi", config.n_atoms, config.spacing, a1, a2, config.workers)
    if not np.all(np.isfinite(mat)):
        raise ArithmeticError("non-finite values in CSI map")
    stats = _stats(mat)
    stats["violation_fraction"] = float(np.mean(mat < 1.0))
    return GridResult(a1, a2, {"csi": mat}, _metadata(config, stats={"csi": stats}))


@dataclass
class DynamicsResult:
    trajectory: list[TwoAtomState]
    steady: TwoAtomState
    residual: float
    deviation: float
    metadata: dict[str, Any]


def dressed_params(config: SweepConfig) -> DressedParams:
    g_m, g_c, g_p = config.gammas
    return DressedParams(config.rabi, config.detuning, g_m, g_c, g_p)


def run_dynamics(config: SweepConfig) -> DynamicsResult:
    config.validate()
    params = dressed_params(config)
    # same k for all three bands, so one collective factor serves every band
    chi, _ = collective_coupling(2.0 * math.pi * config.spacing, config.coupling)
    coeffs = coefficients(params, (chi, chi, chi))
    initial = TwoAtomState(*config.initial)
    traj = evolve(initial, coeffs, config.t_end, config.dt)
    final = traj[-1]
    steady = steady_state(coeffs)
    res = residual(final, coeffs)
    dev = float(np.max(np.abs(final.as_array() - steady.as_array())))
    meta = _metadata(
        config,
        mixing_angle=params.mixing_angle,
        chi=chi,
        coefficients=dataclasses.asdict(coeffs),
        final={"t": final.time, "x": final.x, "y": final.y, "z": final.z},
        steady_state={"x": steady.x, "y": steady.y, "z": steady.z},
        residual=res,
        steady_deviation=dev,
    )
    return DynamicsResult(traj, steady, res, dev, meta)


def _oracle_task(args) -> tuple[int, str, float]:
    n, label, steps, lo, hi = args
    rep = oracle_sweep_report([n], steps=steps, pairs=[label], delta_min=lo, delta_max=hi)
    return n, label, rep.max_deviation[str(n)][label]


def oracle_worker_cap(n_max: int, requested: int) -> int:
    """Bound concurrent oracle workers by available memory (about 8 dense 4^N complex buffers each)."""
    per_worker = 8 * 16 * 4**n_max
    try:
        total = os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):
        total = 4 * 2**30
    return max(1, min(requested, int(0.5 * total // per_worker)))


def run_oracle_check(config: SweepConfig) -> OracleReport:
    config.validate()
    for n in config.n_range:
        if not 2 <= n <= MAX_ATOMS:
            raise CapacityError(f"oracle supports 2 <= N <= {MAX_ATOMS}, got N={n}")
    lo, hi = -math.pi, math.pi
    labels = [pair_label(p) for p in config.pairs]
    tasks = [(n, lab, config.delta_steps, lo, hi) for n in config.n_range for lab in labels]
    workers = oracle_worker_cap(max(config.n_range, default=2), config.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_oracle_task, tasks))
    else:
        results = [_oracle_task(t) for t in tasks]
    report = OracleReport(list(config.n_range), config.delta_steps, lo, hi)
    for n, lab, dev in results:
        report.max_deviation.setdefault(str(n), {})[lab] = dev
    return report


@dataclass
class ResolutionResult:
    delta: np.ndarray
    weak: np.ndarray
    strong: np.ndarray
    ratio: float
    metadata: dict[str, Any]


def run_resolution(config: SweepConfig) -> ResolutionResult:
    config.validate()
    delta = np.linspace(-2.0 * math.pi, 2.0 * math.pi, config.profile_steps)
    weak = np.asarray(g2_weak_field(config.saturation, delta))
    strong = np.asarray(g2_strong_central_single_detector(delta))
    ratio = fringe_period_ratio(config.saturation)
    return ResolutionResult(delta, weak, strong, ratio, _metadata(config, period_ratio=ratio))


# -- output -------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def write_grid_csv(path, alpha1: np.ndarray, alpha2: np.ndarray, mat: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha1", "alpha2", "value"])
        for i, a1 in enumerate(alpha1):
            s1 = _fmt(a1)
            for j, a2 in enumerate(alpha2):
                w.writerow([s1, _fmt(a2), _fmt(mat[i, j])])


def read_grid_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_grid_csv`: returns ``(alpha1, alpha2, matrix)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    a1 = np.unique(data[:, 0])
    a2 = np.unique(data[:, 1])
    return a1, a2, data[:, 2].reshape(len(a1), len(a2))


def output_paths(out, labels: list[str]) -> dict[str, Path]:
    out = Path(out)
    if len(labels) == 1:
        return {labels[0]: out}
    return {lab: out.with_name(f"{out.stem}_{lab}{out.suffix}") for lab in labels}


def sidecar_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".meta.json")


def _prepare(out) -> None:
    Path(out).parent.mkdir(parents=True, exist_ok=True)


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_grid_result(result: GridResult, out, fmt: str = "csv") -> list[Path]:
    _prepare(out)
    labels = list(result.values)
    if fmt == "json":
        doc = {
            "alpha1": result.alpha1.tolist(),
            "alpha2": result.alpha2.tolist(),
            "values": {k: v.tolist() for k, v in result.values.items()},
            "metadata": result.metadata,
        }
        _dump(doc, out)
        return [Path(out)]
    paths = output_paths(out, labels)
    for lab, p in paths.items():
        write_grid_csv(p, result.alpha1, result.alpha2, result.values[lab])
    meta = dict(result.metadata, files={lab: p.name for lab, p in paths.items()})
    _dump(meta, sidecar_path(out))
    return list(paths.values())


def write_dynamics_result(result: DynamicsResult, out, fmt: str = "csv") -> None:
    _prepare(out)
    if fmt == "json":
        doc = {
            "trajectory": [[s.time, s.x, s.y, s.z] for s in result.trajectory],
            "metadata": result.metadata,
        }
        _dump(doc, out)
        return
    write_trajectory_csv(result.trajectory, out)
    _dump(result.metadata, sidecar_path(out))


def write_resolution_result(result: ResolutionResult, out, fmt: str = "csv") -> None:
    _prepare(out)
    if fmt == "json":
        doc = {
            "delta": result.delta.tolist(),
            "weak": result.weak.tolist(),
            "strong": result.strong.tolist(),
            "metadata": result.metadata,
        }
        _dump(doc, out)
        return
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta", "weak", "strong"])
        for d, a, b in zip(result.delta, result.weak, result.strong):
            w.writerow([_fmt(d), _fmt(a), _fmt(b)])
    _dump(result.metadata, sidecar_path(out))
