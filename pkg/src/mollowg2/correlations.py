"""Closed-form zero-delay band correlations for a strongly driven resonant chain.

All kernels take detection phases ``delta1, delta2`` directly and broadcast over
numpy arrays. The formulas assume resonant driving (theta = pi/4) in the
secular limit; see :func:`validity` for the corresponding advisory flags.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .params import (
    Band,
    ChainGeometry,
    DressedParams,
    InvalidParameterError,
    detection_phase,
    is_resonant,
    parse_pair,
    secular_regime_check,
)


class PoleError(ArithmeticError):
    """Raised when the weak-field formula is evaluated on its pole."""


_PHI_EPS = 1e-9


def phi(n_atoms: int, delta):
    """Array factor sin^2(N delta/2) / sin^2(delta/2), equal to N^2 at delta = 2 pi m."""
    if n_atoms < 1:
        raise InvalidParameterError(f"n_atoms must be >= 1, got {n_atoms}")
    d = np.asarray(delta, dtype=float)
    den = np.sin(0.5 * d)
    near = np.abs(den) < _PHI_EPS
    safe = np.where(near, 1.0, den)
    out = np.where(near, float(n_atoms * n_atoms), np.sin(0.5 * n_atoms * d) ** 2 / safe**2)
    return float(out) if out.ndim == 0 else out


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def g2_two_atom(pair, delta1, delta2):
    m, n = parse_pair(pair)
    d1 = np.asarray(delta1, dtype=float)
    d2 = np.asarray(delta2, dtype=float)
    if m is Band.C and n is Band.C:
        out = 1.0 + np.cos(d1) * np.cos(d2)
    elif m is Band.C or n is Band.C:
        out = np.ones(np.broadcast(d1, d2).shape)
    elif m is n:
        out = 0.5 * (1.0 + np.cos(d1 - d2))
    else:
        out = 0.5 * (3.0 + np.cos(d1 + d2))
    return _scalar(out)


def g2_chain(pair, n_atoms: int, delta1, delta2):
    """Band-pair correlation for a regular chain of ``n_atoms`` emitters."""
    if int(n_atoms) != n_atoms or n_atoms < 2:
        raise InvalidParameterError(f"n_atoms must be an integer >= 2, got {n_atoms}")
    m, n = parse_pair(pair)
    d1 = np.asarray(delta1, dtype=float)
    d2 = np.asarray(delta2, dtype=float)
    inv = 1.0 / n_atoms
    if m is Band.C and n is Band.C:
        out = 1.0 - 2.0 * inv + (phi(n_atoms, d1 + d2) + phi(n_atoms, d1 - d2)) * inv * inv
    elif m is Band.C or n is Band.C:
        out = np.ones(np.broadcast(d1, d2).shape)
    elif m is n:
        out = 1.0 - 2.0 * inv + phi(n_atoms, d1 - d2) * inv * inv
    else:
        out = 1.0 + phi(n_atoms, d1 + d2) * inv * inv
    return _scalar(out)


def csi(n_atoms: int, delta1, delta2):
    """Cauchy-Schwarz parameters ``(chi_left, chi_right)``; values below 1 violate the inequality."""
    if int(n_atoms) != n_atoms or n_atoms < 2:
        raise InvalidParameterError(f"n_atoms must be an integer >= 2, got {n_atoms}")
    d1 = np.asarray(delta1, dtype=float)
    d2 = np.asarray(delta2, dtype=float)
    n2 = float(n_atoms * n_atoms)
    ratio = (n2 - 2.0 * n_atoms + phi(n_atoms, d1 - d2)) / (n2 + phi(n_atoms, d1 + d2))
    chi = _scalar(ratio * ratio)
    # g2_LR == g2_RL, so both parameters coincide
    return chi, chi


def csi_from_g2(ll, rr, lr, rl):
    """Cauchy-Schwarz parameters from the four sideband correlations."""
    return ll * rr / lr**2, ll * rr / rl**2


def csi_two_atom(delta1, delta2):
    d1 = np.asarray(delta1, dtype=float)
    d2 = np.asarray(delta2, dtype=float)
    return _scalar(((1.0 + np.cos(d1 - d2)) / (3.0 + np.cos(d1 + d2))) ** 2)


def g2_weak_field(saturation_omega: float, delta):
    """Two-atom single-detector correlation for weak driving, without band separation."""
    if not saturation_omega > 0:
        raise InvalidParameterError(f"Omega/gamma must be > 0, got {saturation_omega}")
    if saturation_omega >= 1:
        warnings.warn(
            f"Omega/gamma={saturation_omega} is outside the weak-field regime (< 1)",
            stacklevel=2,
        )
    s = 1.0 + 2.0 * saturation_omega**2
    den = s + np.cos(np.asarray(delta, dtype=float))
    if np.any(np.abs(den) < 1e-300):
        raise PoleError("s + cos(delta) vanishes")
    return _scalar((s / den) ** 2)


def g2_strong_central_single_detector(delta):
    return _scalar(1.0 + np.cos(np.asarray(delta, dtype=float)) ** 2)


def fringe_period(func, span: float = 4.0 * math.pi, samples: int = 4001) -> float:
    """Fundamental period of a smooth periodic ``func`` from the spacing of its global maxima."""
    offset = -0.37  # keeps maxima at multiples of pi off the sampling-window edges
    grid = np.linspace(offset, offset + span, samples)
    vals = np.asarray(func(grid), dtype=float)
    step = grid[1] - grid[0]
    idx = [i for i in range(1, samples - 1) if vals[i] >= vals[i - 1] and vals[i] > vals[i + 1]]
    peaks = []
    for i in idx:
        res = minimize_scalar(
            lambda t: -float(func(t)),
            bounds=(grid[i] - step, grid[i] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        peaks.append((res.x, -res.fun))
    if not peaks:
        raise ValueError("no maxima found in the sampling window")
    top = max(v for _, v in peaks)
    locs = sorted(x for x, v in peaks if abs(v - top) <= 1e-9 * max(1.0, abs(top)))
    if len(locs) < 2:
        raise ValueError("fewer than two repeated maxima; widen the span")
    return float(np.mean(np.diff(locs)))


def fringe_period_ratio(saturation_omega: float) -> float:
    """Weak-field over strong-field fringe period of the single-detector central-band pattern."""
    weak = fringe_period(lambda d: g2_weak_field(saturation_omega, d))
    strong = fringe_period(g2_strong_central_single_detector)
    return weak / strong


@dataclass(frozen=True)
class CorrelationResult:
    band_pair: tuple[Band, Band]
    delta1: float
    delta2: float
    value: float
    csi_left: float | None = None
    csi_right: float | None = None


def evaluate(pair, n_atoms: int, delta1: float, delta2: float, with_csi: bool = False) -> CorrelationResult:
    m, n = parse_pair(pair)
    value = g2_chain((m, n), n_atoms, delta1, delta2)
    left = right = None
    if with_csi:
        left, right = csi(n_atoms, delta1, delta2)
    return CorrelationResult((m, n), float(delta1), float(delta2), value, left, right)


def evaluate_at_angles(pair, geometry: ChainGeometry, alpha1, alpha2):
    """Adapter from detector angles to the phase-based kernels."""
    d1 = detection_phase(geometry, alpha1)
    d2 = detection_phase(geometry, alpha2)
    return g2_chain(pair, geometry.n_atoms, d1, d2)


@dataclass(frozen=True)
class Validity:
    resonant: bool
    secular: bool
    secular_margin: float


def validity(params: DressedParams, n_atoms: int, threshold: float = 10.0) -> Validity:
    """Whether the closed forms apply: resonant drive and well-separated bands."""
    check = secular_regime_check(params, n_atoms, threshold)
    return Validity(is_resonant(params), check.passed, check.margin)
