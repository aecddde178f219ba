"""Exact operator-algebra evaluation of the band correlations for small chains.

Single-atom basis ordering is ``(|2~>, |1~>)`` (upper, lower dressed state).
Atom ``j`` of ``n`` occupies tensor factor ``j`` (leftmost is atom 0).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .correlations import g2_chain
from .params import BAND_PAIRS, Band, parse_pair, pair_label

MAX_ATOMS = 12
TOLERANCE = 1e-10


class CapacityError(ValueError):
    """Raised when a chain is too large for dense operator algebra."""


class NormalizationError(ArithmeticError):
    pass


THETA = math.pi / 4  # resonant drive

R_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
R_12 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |1~><2~|
R_21 = R_12.T.copy()  # |2~><1~|


def dressed_transition(alpha: int, beta: int) -> np.ndarray:
    """Single-atom |alpha~><beta~| with alpha, beta in {1, 2}."""
    op = np.zeros((2, 2), dtype=complex)
    op[2 - alpha, 2 - beta] = 1.0
    return op


def source_operator(band: Band) -> np.ndarray:
    band = Band(band)
    if band is Band.C:
        return R_Z * (math.sin(2 * THETA) / 2)
    if band is Band.R:
        return R_21 * math.cos(THETA) ** 2
    return R_12 * math.sin(THETA) ** 2


def _check_capacity(n_atoms: int) -> None:
    if int(n_atoms) != n_atoms or not 1 <= n_atoms <= MAX_ATOMS:
        raise CapacityError(f"n_atoms must be an integer in [1, {MAX_ATOMS}], got {n_atoms}")


def embed(op: np.ndarray, site: int, n_atoms: int) -> np.ndarray:
    """Single-atom operator acting on ``site`` of an ``n_atoms`` chain."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(n_atoms):
        out = np.kron(out, op if j == site else np.eye(2, dtype=complex))
    return out


@lru_cache(maxsize=64)
def _site_operators(n_atoms: int, band: Band) -> tuple[np.ndarray, ...]:
    src = source_operator(band)
    ops = tuple(embed(src, j, n_atoms) for j in range(n_atoms))
    for o in ops:
        o.setflags(write=False)
    return ops


@dataclass(frozen=True, eq=False)
class BandOperator:
    matrix: np.ndarray
    band: Band
    detector_phase: float

    @property
    def n_atoms(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    @property
    def dag(self) -> np.ndarray:
        return self.matrix.conj().T


def build_band_operator(n_atoms: int, band, delta: float) -> BandOperator:
    """Field source of ``band`` seen at detection phase ``delta``: sum_j S_j exp(i j delta)."""
    _check_capacity(n_atoms)
    band = Band(band)
    ops = _site_operators(n_atoms, band)
    mat = np.zeros_like(ops[0])
    for j, o in enumerate(ops):
        mat += o * np.exp(1j * j * delta)
    return BandOperator(mat, band, float(delta))


def steady_density(n_atoms: int) -> np.ndarray:
    """Resonant strong-field steady state: equal dressed populations, no inter-atom correlations."""
    _check_capacity(n_atoms)
    d = 2**n_atoms
    return np.eye(d, dtype=complex) / d


def two_atom_density(state) -> np.ndarray:
    """Two-atom density matrix diagonal in {e, s, a, g} built from a dynamics state.

    Exploratory only: the closed-form correlators assume :func:`steady_density`.
    """
    p_e, p_s, p_a, p_g = state.populations()
    up, lo = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    e = np.kron(up, up)
    g = np.kron(lo, lo)
    s = (np.kron(up, lo) + np.kron(lo, up)) / math.sqrt(2)
    a = (np.kron(up, lo) - np.kron(lo, up)) / math.sqrt(2)
    rho = sum(p * np.outer(v, v) for p, v in ((p_e, e), (p_s, s), (p_a, a), (p_g, g)))
    return rho.astype(complex)


def _expect(rho: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.trace(rho @ op))


def g2_numerator(n_atoms: int, pair, delta1: float, delta2: float, rho=None) -> complex:
    """Unnormalized <A_m^dag(d1) A_n^dag(d2) A_n(d2) A_m(d1)>, returned complex."""
    m, n = parse_pair(pair)
    a = build_band_operator(n_atoms, m, delta1)
    b = build_band_operator(n_atoms, n, delta2)
    rho = steady_density(n_atoms) if rho is None else rho
    return _expect(rho, a.dag @ b.dag @ b.matrix @ a.matrix)


def first_order(n_atoms: int, band, delta: float, rho=None) -> complex:
    a = build_band_operator(n_atoms, band, delta)
    rho = steady_density(n_atoms) if rho is None else rho
    return _expect(rho, a.dag @ a.matrix)


def oracle_g2(n_atoms: int, pair, delta1: float, delta2: float, rho=None) -> float:
    m, n = parse_pair(pair)
    num = g2_numerator(n_atoms, (m, n), delta1, delta2, rho)
    i1 = first_order(n_atoms, m, delta1, rho)
    i2 = first_order(n_atoms, n, delta2, rho)
    scale = max(1.0, abs(num))
    if abs(num.imag) > 1e-12 * scale:
        raise NormalizationError(f"correlation numerator not real: {num}")
    den = i1.real * i2.real
    if abs(den) < 1e-300:
        raise NormalizationError(f"vanishing first-order intensity for pair {m}{n}")
    return num.real / den


@dataclass
class OracleReport:
    n_values: list[int]
    steps: int
    delta_min: float
    delta_max: float
    max_deviation: dict[str, dict[str, float]] = field(default_factory=dict)
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return all(v < self.tolerance for per_n in self.max_deviation.values() for v in per_n.values())

    @property
    def worst(self) -> float:
        vals = [v for per_n in self.max_deviation.values() for v in per_n.values()]
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["worst"] = self.worst
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def oracle_sweep_report(
    n_range: Iterable[int],
    steps: int = 21,
    pairs: Sequence = BAND_PAIRS,
    delta_min: float = -math.pi,
    delta_max: float = math.pi,
    tolerance: float = TOLERANCE,
) -> OracleReport:
    """Worst-case |oracle - closed form| per (N, band pair) on a ``steps x steps`` phase grid."""
    n_values = list(n_range)
    for n in n_values:
        _check_capacity(n)
    grid = np.linspace(delta_min, delta_max, steps)
    report = OracleReport(n_values, steps, delta_min, delta_max, tolerance=tolerance)
    for n in n_values:
        per_n = {}
        for pair in pairs:
            label = pair_label(pair)
            worst = 0.0
            for d1, d2 in itertools.product(grid, grid):
                exact = oracle_g2(n, pair, d1, d2)
                closed = g2_chain(pair, n, d1, d2)
                worst = max(worst, abs(exact - closed))
            per_n[label] = worst
        report.max_deviation[str(n)] = per_n
    return report
