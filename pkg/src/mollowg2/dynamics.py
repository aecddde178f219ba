"""Two-atom collective dressed-state dynamics.

The pair is described by three real variables built from the populations of
the collective dressed states |e>, |s>, |a>, |g>::

    x = 2 (p_e - p_g),   y = p_s - p_a,   z = p_e + p_g - p_s - p_a

which obey a constant-coefficient linear system  d/dt (x, y, z) = M (x, y, z) + b.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .params import DressedParams


class StepSizeError(ValueError):
    """Raised when the integration step violates the stability guard."""


class DegenerateParametersError(ValueError):
    """Raised when the steady-state system is singular."""


@dataclass(frozen=True)
class TwoAtomState:
    x: float
    y: float
    z: float
    time: float = 0.0

    @classmethod
    def from_populations(cls, p_e, p_s, p_a, p_g, time=0.0) -> "TwoAtomState":
        return cls(2.0 * (p_e - p_g), p_s - p_a, p_e + p_g - p_s - p_a, time)

    @classmethod
    def ground(cls) -> "TwoAtomState":
        """Both atoms in the lower dressed state."""
        return cls(-2.0, 0.0, 1.0)

    def populations(self) -> tuple[float, float, float, float]:
        """Collective populations ``(p_e, p_s, p_a, p_g)``, using normalization."""
        even = 0.5 * (1.0 + self.z)
        odd = 0.5 * (1.0 - self.z)
        return (
            0.5 * even + 0.25 * self.x,
            0.5 * odd + 0.5 * self.y,
            0.5 * odd - 0.5 * self.y,
            0.5 * even - 0.25 * self.x,
        )

    def is_physical(self, tol: float = 1e-12) -> bool:
        return all(-tol <= p <= 1 + tol for p in self.populations())

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class DynamicsCoefficients:
    xi_plus: float
    xi_minus: float
    zeta_plus: float
    zeta_minus: float
    c0: float

    def system(self) -> tuple[np.ndarray, np.ndarray]:
        """Drift matrix ``M`` and inhomogeneity ``b``."""
        xp, xm, zp, zm, c0 = self.xi_plus, self.xi_minus, self.zeta_plus, self.zeta_minus, self.c0
        m = np.array([
            [-2.0 * xp, 4.0 * zm, 0.0],
            [-zm, -2.0 * (c0 + xp), 2.0 * zp],
            [2.0 * xm, 4.0 * zp, -4.0 * xp],
        ])
        b = np.array([4.0 * xm, 0.0, 0.0])
        return m, b

    def max_rate(self) -> float:
        return float(np.max(np.abs(self.system()[0])))


def coefficients(params: DressedParams, chi_bands: Sequence[float]) -> DynamicsCoefficients:
    """Rates of the pair equations.

    ``chi_bands`` holds the collective decay factor at (omega_-, omega_L, omega_+).
    """
    chi_m, chi_c, chi_p = (float(c) for c in chi_bands)
    if max(abs(chi_m), abs(chi_c), abs(chi_p)) > 1:
        raise ValueError("collective decay factors must satisfy |chi| <= 1")
    g_m, g_c, g_p = params.band_gammas
    c2 = params.cos2theta
    s4 = (0.5 * (1.0 - c2)) ** 2
    c4 = (0.5 * (1.0 + c2)) ** 2
    return DynamicsCoefficients(
        xi_plus=g_m * s4 + g_p * c4,
        xi_minus=g_m * s4 - g_p * c4,
        zeta_plus=g_m * chi_m * s4 + g_p * chi_p * c4,
        zeta_minus=g_m * chi_m * s4 - g_p * chi_p * c4,
        c0=g_c * (1.0 - chi_c) * params.sin2theta**2,
    )


def derivative(state: np.ndarray, coeffs: DynamicsCoefficients) -> np.ndarray:
    m, b = coeffs.system()
    return m @ state + b


def evolve(
    initial: TwoAtomState,
    coeffs: DynamicsCoefficients,
    t_end: float,
    dt: float,
) -> list[TwoAtomState]:
    """Integrate the pair equations with classical fixed-step RK4.

    The last step is shortened so the trajectory ends exactly at ``initial.time + t_end``.
    """
    if not dt > 0:
        raise StepSizeError(f"dt must be > 0, got {dt}")
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    rate = coeffs.max_rate()
    if rate > 0 and dt > 0.1 / rate:
        raise StepSizeError(
            f"dt={dt} exceeds stability guard 0.1/max_rate={0.1 / rate:.6g}; reduce dt"
        )
    m, b = coeffs.system()

    def f(v):
        return m @ v + b

    v = initial.as_array()
    t0 = initial.time
    n_full = int(math.floor(t_end / dt + 1e-9))
    steps = [dt] * n_full
    rest = t_end - n_full * dt
    if rest > 1e-12 * max(1.0, t_end):
        steps.append(rest)

    out = [TwoAtomState(*v, time=t0)]
    t = t0
    for i, h in enumerate(steps):
        k1 = f(v)
        k2 = f(v + 0.5 * h * k1)
        k3 = f(v + 0.5 * h * k2)
        k4 = f(v + h * k3)
        v = v + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt if i < n_full else t0 + t_end
        out.append(TwoAtomState(*v, time=t))
    return out


def exact_solution(initial: TwoAtomState, coeffs: DynamicsCoefficients, t: float) -> np.ndarray:
    """Closed-form solution through the augmented matrix exponential."""
    m, b = coeffs.system()
    aug = np.zeros((4, 4))
    aug[:3, :3] = m
    aug[:3, 3] = b
    v = np.append(initial.as_array(), 1.0)
    return (expm(aug * t) @ v)[:3]


def steady_state(coeffs: DynamicsCoefficients) -> TwoAtomState:
    m, b = coeffs.system()
    scale = max(coeffs.max_rate(), 1e-300)
    det = float(np.linalg.det(m))
    if abs(det) < 1e-14 * scale**3:
        raise DegenerateParametersError(f"steady-state system is singular (det={det:.3e})")
    # LAPACK gesv: LU with partial pivoting
    x, y, z = np.linalg.solve(m, -b)
    return TwoAtomState(float(x), float(y), float(z))


def analytic_steady_state(coeffs: DynamicsCoefficients) -> TwoAtomState:
    """Closed form valid for equal band rates and equal sideband collective factors."""
    r = coeffs.xi_minus / coeffs.xi_plus
    return TwoAtomState(2.0 * r, 0.0, r * r)


def residual(state: TwoAtomState, coeffs: DynamicsCoefficients) -> float:
    return float(np.linalg.norm(derivative(state.as_array(), coeffs)))


def write_trajectory_csv(trajectory: Sequence[TwoAtomState], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "y", "z"])
        for s in trajectory:
            w.writerow([repr(float(s.time)), repr(float(s.x)), repr(float(s.y)), repr(float(s.z))])


def read_trajectory_csv(path) -> list[TwoAtomState]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [TwoAtomState(float(r["x"]), float(r["y"]), float(r["z"]), float(r["t"])) for r in rows]
