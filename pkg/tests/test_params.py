import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from mollowg2.params import (
    Band,
    ChainGeometry,
    DressedParams,
    InvalidParameterError,
    TabulatedCoupling,
    axial_dipole_kernel,
    collective_coupling,
    detection_phase,
    generalized_rabi,
    mixing_angle,
    parse_pair,
    perpendicular_dipole_kernel,
    secular_regime_check,
)


@pytest.mark.parametrize(
    "delta, omega, expected",
    [
        (0.0, 3.7, math.pi / 4),
        (2.0, 1.0, math.pi / 8),
        (-2.0, 1.0, 3 * math.pi / 8),
        (20.0, 10.0, math.pi / 8),
    ],
)
def test_mixing_angle_examples(delta, omega, expected):
    assert mixing_angle(delta, omega) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("omega", [0.0, -1.0])
def test_mixing_angle_requires_drive(omega):
    with pytest.raises(InvalidParameterError):
        mixing_angle(1.0, omega)


@given(omega=st.floats(1e-2, 1e2), ratio=st.floats(-20, 20))
def test_mixing_angle_invariants(omega, ratio):
    # cot(2 theta) is ill-conditioned as |delta/omega| grows; keep the ratio moderate
    delta = ratio * omega
    th = mixing_angle(delta, omega)
    assert 0 < th < math.pi / 2
    assert math.sin(th) ** 2 + math.cos(th) ** 2 == pytest.approx(1.0, abs=1e-15)
    # cot(2 theta) * 2 Omega = Delta
    assert 2 * omega * math.cos(2 * th) / math.sin(2 * th) == pytest.approx(delta, abs=1e-12 * max(1.0, abs(delta)))


@pytest.mark.parametrize("omega, delta, expected", [(3, 8, 5), (1, 0, 1), (0, 4, 2)])
def test_generalized_rabi(omega, delta, expected):
    assert generalized_rabi(omega, delta) == expected


@given(omega=st.floats(0, 1e3), delta=st.floats(-1e3, 1e3))
def test_generalized_rabi_bounds(omega, delta):
    g = generalized_rabi(omega, delta)
    assert g >= omega and g >= abs(delta) / 2
    assert g**2 == pytest.approx(omega**2 + delta**2 / 4, rel=1e-14, abs=1e-300)


def test_dressed_params_band_frequencies():
    p = DressedParams(rabi=3.0, detuning=8.0, laser_freq=100.0)
    assert p.gen_rabi == 5.0
    f = p.band_frequencies
    assert f[Band.L] == 90.0 and f[Band.C] == 100.0 and f[Band.R] == 110.0
    assert p.band_gammas == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("kwargs", [{"rabi": 0.0}, {"rabi": 1.0, "gamma_plus": 0.0}])
def test_dressed_params_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        DressedParams(**kwargs)


@pytest.mark.parametrize(
    "alpha, expected",
    [(math.pi / 2, 0.0), (0.0, 10 * math.pi), (2 * math.pi / 3, -5 * math.pi)],
)
def test_detection_phase_examples(alpha, expected):
    geo = ChainGeometry(2, 5.0)
    assert detection_phase(geo, alpha) == pytest.approx(expected, abs=1e-12)


@given(alpha=st.floats(0, math.pi), spacing=st.floats(0.1, 20))
def test_detection_phase_odd_about_right_angle(alpha, spacing):
    geo = ChainGeometry(3, spacing)
    d = detection_phase(geo, alpha)
    assert detection_phase(geo, math.pi - alpha) == pytest.approx(-d, abs=1e-12 * spacing)
    assert abs(d) <= geo.wavenumber * spacing


def test_detection_phase_rejects_angles_outside_range():
    with pytest.raises(InvalidParameterError):
        detection_phase(ChainGeometry(2, 1.0), [0.1, 3.5])


@pytest.mark.parametrize("n, spacing", [(1, 1.0), (2, 0.0), (2.5, 1.0)])
def test_chain_geometry_validation(n, spacing):
    with pytest.raises(InvalidParameterError):
        ChainGeometry(n, spacing)


def test_parse_pair():
    assert parse_pair("lr") == (Band.L, Band.R)
    assert parse_pair(("C", Band.R)) == (Band.C, Band.R)
    with pytest.raises(InvalidParameterError):
        parse_pair("XY")


# -- collective coupling -----------------------------------------------------

def _quadrature_chi(x, axis_component):
    """3/(8 pi) * integral over emission directions of (1 - (k.d)^2) exp(i x k.r), r along z."""
    if axis_component:
        proj = lambda ph, th: np.cos(th)  # dipole along the chain
    else:
        proj = lambda ph, th: np.sin(th) * np.cos(ph)  # dipole along x, perpendicular
    f = lambda ph, th: (1 - proj(ph, th) ** 2) * np.cos(x * np.cos(th)) * np.sin(th)
    val, _ = dblquad(f, 0, np.pi, 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-12)
    return 3 / (8 * np.pi) * val


@pytest.mark.parametrize("model", ["perpendicular", "axial"])
def test_coupling_limits(model):
    chi0, om0 = collective_coupling(1e-4, model)
    assert chi0 == pytest.approx(1.0, abs=1e-7)
    assert abs(om0) > 1e10
    chi_far, om_far = collective_coupling(1e4, model)
    assert abs(chi_far) < 2e-4 and abs(om_far) < 2e-4


def test_coupling_far_field_example():
    chi, _ = collective_coupling(1e3)
    assert abs(chi) < 1e-2


def test_coupling_at_five_wavelengths_matches_quadrature():
    x = 2 * math.pi * 5
    chi, _ = perpendicular_dipole_kernel(x)
    # frozen from the quadrature oracle below
    assert chi == pytest.approx(0.0015198177546350974, abs=1e-12)
    assert chi == pytest.approx(_quadrature_chi(x, axis_component=False), abs=1e-11)


@pytest.mark.parametrize("x", [0.3, 1.0, 4.0, 12.5])
@pytest.mark.parametrize("axial", [False, True])
def test_coupling_matches_quadrature(x, axial):
    kernel = axial_dipole_kernel if axial else perpendicular_dipole_kernel
    assert kernel(x)[0] == pytest.approx(_quadrature_chi(x, axial), abs=1e-10)


@pytest.mark.parametrize("kernel", [perpendicular_dipole_kernel, axial_dipole_kernel])
def test_coupling_series_branch_is_continuous(kernel):
    lo = kernel(0.01 * (1 - 1e-9))[0]
    hi = kernel(0.01 * (1 + 1e-9))[0]
    assert lo == pytest.approx(hi, abs=1e-11)


def test_coupling_bounded_by_one():
    xs = np.geomspace(1e-4, 1e4, 4000)
    for kernel in (perpendicular_dipole_kernel, axial_dipole_kernel):
        chis = np.array([kernel(x)[0] for x in xs])
        assert np.all(np.abs(chis) <= 1.0)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_coupling_rejects_overlap(x):
    with pytest.raises(InvalidParameterError):
        collective_coupling(x)


def test_coupling_plugins():
    table = TabulatedCoupling([1.0, 2.0, 3.0], [0.5, 0.2, 0.1], [0.3, 0.1, 0.0])
    assert collective_coupling(1.5, table) == pytest.approx((0.35, 0.2))
    assert collective_coupling(2.0, lambda x: (0.0, 0.0)) == (0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        collective_coupling(1.0, "isotropic")
    with pytest.raises(InvalidParameterError):
        table(5.0)


@pytest.mark.parametrize(
    "gen_rabi, n, passed, margin",
    [(100.0, 2, True, 50.0), (5.0, 2, False, 2.5), (80.0, 8, True, 10.0)],
)
def test_secular_regime_check(gen_rabi, n, passed, margin):
    check = secular_regime_check(DressedParams(rabi=gen_rabi), n)
    assert check.passed is passed
    assert check.margin == pytest.approx(margin)


def test_secular_regime_uses_largest_band_rate():
    check = secular_regime_check(DressedParams(rabi=100.0, gamma_plus=5.0), 2)
    assert check.margin == pytest.approx(10.0)
