"""Dressed-state and chain-geometry parameters.

Units: the reference spontaneous rate gamma is 1, so every rate and frequency
is a dimensionless multiple of gamma. Lengths are in units of the optical
wavelength lambda.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np


class InvalidParameterError(ValueError):
    """Raised when a physical parameter lies outside its allowed domain."""


class Band(str, enum.Enum):
    """Spectral band of the Mollow triplet."""

    C = "C"  # central, at omega_L
    L = "L"  # left sideband, omega_L - 2 gen_rabi
    R = "R"  # right sideband, omega_L + 2 gen_rabi

    def __str__(self) -> str:
        return self.value


BAND_PAIRS: tuple[tuple[Band, Band], ...] = tuple(
    (m, n) for m in Band for n in Band
)


def parse_pair(pair) -> tuple[Band, Band]:
    """Accept ``"LR"``, ``("L", "R")`` or ``(Band.L, Band.R)``."""
    if isinstance(pair, str):
        if len(pair) != 2:
            raise InvalidParameterError(f"band pair must be two letters, got {pair!r}")
        pair = (pair[0], pair[1])
    try:
        m, n = pair
        return Band(str(m).upper()), Band(str(n).upper())
    except (ValueError, TypeError) as exc:
        raise InvalidParameterError(f"unknown band pair {pair!r}") from exc


def pair_label(pair) -> str:
    m, n = parse_pair(pair)
    return m.value + n.value


def mixing_angle(delta: float, omega: float) -> float:
    """Dressed-state mixing angle theta in (0, pi/2) with cot(2 theta) = delta / (2 omega)."""
    if not omega > 0:
        raise InvalidParameterError(f"Rabi frequency must be > 0, got {omega}")
    return 0.5 * math.atan2(2.0 * omega, delta)


def generalized_rabi(omega: float, delta: float) -> float:
    if omega < 0:
        raise InvalidParameterError(f"Rabi frequency must be >= 0, got {omega}")
    return math.hypot(omega, 0.5 * delta)


@dataclass(frozen=True)
class DressedParams:
    """Driving field and per-band decay rates of a single two-level atom.

    ``gamma_minus``, ``gamma_center`` and ``gamma_plus`` are the reservoir
    rates at omega_-, omega_L and omega_+.
    """

    rabi: float
    detuning: float = 0.0
    gamma_minus: float = 1.0
    gamma_center: float = 1.0
    gamma_plus: float = 1.0
    laser_freq: float = 0.0

    def __post_init__(self):
        if not self.rabi > 0:
            raise InvalidParameterError(f"rabi must be > 0, got {self.rabi}")
        for name in ("gamma_minus", "gamma_center", "gamma_plus"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0")

    @property
    def mixing_angle(self) -> float:
        return mixing_angle(self.detuning, self.rabi)

    @property
    def gen_rabi(self) -> float:
        return generalized_rabi(self.rabi, self.detuning)

    @property
    def cos2theta(self) -> float:
        # exact zero on resonance, unlike cos(2 * mixing_angle)
        return self.detuning / (2.0 * self.gen_rabi)

    @property
    def sin2theta(self) -> float:
        return self.rabi / self.gen_rabi

    @property
    def band_gammas(self) -> tuple[float, float, float]:
        return (self.gamma_minus, self.gamma_center, self.gamma_plus)

    @property
    def band_frequencies(self) -> dict[Band, float]:
        w = 2.0 * self.gen_rabi
        return {
            Band.L: self.laser_freq - w,
            Band.C: self.laser_freq,
            Band.R: self.laser_freq + w,
        }


@dataclass(frozen=True)
class ChainGeometry:
    """Regular linear chain of ``n_atoms`` with nearest-neighbour ``spacing`` (in lambda)."""

    n_atoms: int
    spacing: float

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 2:
            raise InvalidParameterError(f"n_atoms must be an integer >= 2, got {self.n_atoms}")
        if not self.spacing > 0:
            raise InvalidParameterError(f"spacing must be > 0, got {self.spacing}")

    @property
    def wavenumber(self) -> float:
        # lambda = 1; a single k = k_L is used for all three bands
        return 2.0 * math.pi

    @property
    def length(self) -> float:
        return (self.n_atoms - 1) * self.spacing


def detection_phase(geometry: ChainGeometry, alpha):
    """Phase between neighbouring atoms seen by a far-field detector at angle ``alpha``.

    Atom ``j`` contributes with phase ``j * delta``. Works on scalars and arrays.
    """
    a = np.asarray(alpha, dtype=float)
    if np.any((a < 0) | (a > math.pi)):
        raise InvalidParameterError("detector angles must lie in [0, pi]")
    out = geometry.wavenumber * geometry.spacing * np.cos(a)
    return float(out) if out.ndim == 0 else out


# -- collective coupling --------------------------------------------------

class CouplingModel(Protocol):
    """Maps the dimensionless separation ``x = k r`` to ``(chi, omega_dd)``."""

    def __call__(self, x: float) -> tuple[float, float]: ...


def _check_separation(x: float) -> float:
    x = float(x)
    if not x > 0:
        raise InvalidParameterError(f"k*r must be > 0 for non-overlapping emitters, got {x}")
    return x


def perpendicular_dipole_kernel(x: float) -> tuple[float, float]:
    """Free-space kernel for parallel dipoles oriented perpendicular to the chain axis."""
    x = _check_separation(x)
    if x < 1e-2:
        # series avoids cancellation in sin x/x^3 - cos x/x^2
        chi = 1.0 - 0.2 * x * x + 3.0 * x**4 / 280.0
    else:
        s, c = math.sin(x), math.cos(x)
        chi = 1.5 * (s / x + c / x**2 - s / x**3)
    s, c = math.sin(x), math.cos(x)
    omega = 0.75 * (-c / x + s / x**2 + c / x**3)
    return chi, omega


def axial_dipole_kernel(x: float) -> tuple[float, float]:
    """Free-space kernel for dipoles aligned with the chain axis."""
    x = _check_separation(x)
    if x < 1e-2:
        chi = 1.0 - 0.1 * x * x + x**4 / 280.0
    else:
        s, c = math.sin(x), math.cos(x)
        chi = 3.0 * (s / x**3 - c / x**2)
    s, c = math.sin(x), math.cos(x)
    omega = 1.5 * (c / x**3 + s / x**2)
    return chi, omega


class TabulatedCoupling:
    """Coupling interpolated from tabulated ``(x, chi, omega)`` samples, e.g. an engineered reservoir."""

    def __init__(self, x: Sequence[float], chi: Sequence[float], omega: Sequence[float]):
        self.x = np.asarray(x, dtype=float)
        self.chi = np.asarray(chi, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        if self.x.ndim != 1 or not (self.x.shape == self.chi.shape == self.omega.shape):
            raise InvalidParameterError("tabulated coupling arrays must be 1-D and equal length")
        if np.any(np.diff(self.x) <= 0):
            raise InvalidParameterError("tabulated x must be strictly increasing")
        if np.any(np.abs(self.chi) > 1):
            raise InvalidParameterError("|chi| must not exceed 1")

    def __call__(self, x: float) -> tuple[float, float]:
        x = _check_separation(x)
        if x < self.x[0] or x > self.x[-1]:
            raise InvalidParameterError(f"x={x} outside tabulated range")
        return float(np.interp(x, self.x, self.chi)), float(np.interp(x, self.x, self.omega))


COUPLING_MODELS: dict[str, Callable[[float], tuple[float, float]]] = {
    "perpendicular": perpendicular_dipole_kernel,
    "axial": axial_dipole_kernel,
}


def collective_coupling(x: float, model: CouplingModel | str = "perpendicular") -> tuple[float, float]:
    """Collective decay ``chi`` and dipole-dipole shift ``omega_dd`` (units of gamma) at ``x = k r``."""
    if isinstance(model, str):
        try:
            model = COUPLING_MODELS[model]
        except KeyError:
            raise InvalidParameterError(f"unknown coupling model {model!r}") from None
    return model(x)


# -- validity -------------------------------------------------------------

@dataclass(frozen=True)
class RegimeCheck:
    passed: bool
    margin: float
    threshold: float


def secular_regime_check(params: DressedParams, n_atoms: int, threshold: float = 10.0) -> RegimeCheck:
    """Advisory check that the Mollow bands are well separated, gen_rabi >> N gamma."""
    margin = params.gen_rabi / (n_atoms * max(params.band_gammas))
    return RegimeCheck(passed=margin >= threshold, margin=margin, threshold=threshold)


def is_resonant(params: DressedParams, tol: float = 1e-12) -> bool:
    return abs(params.mixing_angle - math.pi / 4) <= tol
