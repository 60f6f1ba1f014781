import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vacuum_entanglement.kernels import (AmplitudeSet, DetectorSpec, FieldModel, GeometrySpec,
                                         ablated_angular_kernel, angular_kernel,
                                         compute_amplitudes, condition_margin, cross_emission,
                                         detector_pair, emission_norm2, emission_norm2_2d,
                                         exchange_amplitude, kg_kernel, pauli_dot,
                                         reduced_ablated_kernel, reduced_kernel, spinor_l,
                                         spinor_r)
from vacuum_entanglement.oracles import angular_integral
from vacuum_entanglement.windows import gaussian_window, superosc_window

unit = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(
    lambda v: 1e-3 < np.linalg.norm(v)).map(lambda v: np.array(v) / np.linalg.norm(v))
G = gaussian_window(1.0)


def test_spinor_special_directions():
    assert np.allclose(spinor_r([0, 0, -2.0]), [0, 1], atol=1e-15)
    assert np.allclose(spinor_r([0, 0, 3.0]), [1, 0], atol=1e-15)
    assert np.allclose(spinor_r([1e-9, 0, 1.0]), [1, 0], atol=1e-8)
    with pytest.raises(ValueError):
        spinor_r([0, 0, 0])


@given(unit, st.floats(0.01, 100.0))
def test_spinor_normalized_and_helicity(n, p):
    u = spinor_r(p * n)
    assert abs(np.vdot(u, u) - 1) < 1e-12
    assert np.allclose(pauli_dot(n) @ u, u, atol=1e-12)
    ul = spinor_l(p * n)
    assert np.allclose(pauli_dot(n) @ ul, -ul, atol=1e-12)


@given(unit, unit)
def test_spinor_overlap_identity(a, b):
    ov = abs(np.vdot(spinor_r(a), spinor_r(b))) ** 2
    assert abs(ov - 0.5 * (1 + a @ b)) < 1e-12


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(0.01, 10))
def test_kernels_symmetric(p, q, L):
    assert angular_kernel(p, q, L) == angular_kernel(q, p, L)
    assert ablated_angular_kernel(p, q, L) == ablated_angular_kernel(q, p, L)


def test_kernel_small_L_limit():
    assert math.isclose(angular_kernel(1.3, 0.7, 1e-9), 1.3 ** 2 * 0.7 ** 2, rel_tol=1e-12)


def test_angular_kernel_matches_angular_quadrature():
    p, q, L = 1.0, 2.0, 3.0
    num = angular_integral(p, q, L, n_theta=64)[0, 0].real
    ref = 8 * math.pi ** 2 * angular_kernel(p, q, L) / (p * q) ** 2
    assert abs(num - ref) <= 1e-6 * abs(ref)
    half = angular_integral(p, q, L, n_theta=64, half_only=True)[0, 0].real
    ref_half = (4 * math.pi) ** 2 / 2 * ablated_angular_kernel(p, q, L) / (p * q) ** 2
    assert abs(half - ref_half) <= 1e-6 * abs(ref_half)
    left = angular_integral(p, q, L, n_theta=64, handedness="left")[0, 0].real
    assert abs(left - num) <= 1e-12 * abs(num)


@pytest.mark.parametrize("L", [0.5, 3.0, 8.0])
def test_reduced_kernels_integrate_angular(L):
    from scipy.integrate import quad
    for w in (0.3, 2.0, 7.5):
        k = quad(lambda p: angular_kernel(p, w - p, L), 0, w, epsabs=0, epsrel=1e-13, limit=200)[0]
        assert abs(k - reduced_kernel(w, L)) <= 1e-10 * w ** 5 / 30
        k = quad(lambda p: ablated_angular_kernel(p, w - p, L), 0, w, epsabs=0, epsrel=1e-13,
                 limit=200)[0]
        assert abs(k - reduced_ablated_kernel(w, L)) <= 1e-10 * w ** 5 / 30


@given(st.floats(0.01, 30.0), st.floats(0.1, 10.0))
def test_reduced_kernel_bounded(w, L):
    assert abs(reduced_kernel(w, L)) <= w ** 5 / 30 * (1 + 1e-12)
    assert abs(reduced_kernel(w, L)) <= w ** 3 * (2 + w * L) / (6 * L * L) * (1 + 1e-12)


def test_kg_kernel():
    assert math.isclose(kg_kernel(2.0, 3.0), math.sin(6.0) / 3.0, rel_tol=1e-14)
    assert math.isclose(kg_kernel(2.0, 1e-12), 2.0, rel_tol=1e-12)


def test_zero_window_gives_zero():
    z = gaussian_window(1.0, eps0=0.0)
    dA, dB, geom = detector_pair(3.0, z, G, 1.0, 1.0)
    assert emission_norm2(dA, FieldModel.DIRAC_RIGHT).value == 0.0
    assert exchange_amplitude(dA, dB, geom, FieldModel.DIRAC_RIGHT).value == 0.0
    dA, dB, geom = detector_pair(3.0, G, z, 1.0, 1.0)
    assert cross_emission(dA, dB, geom, FieldModel.DIRAC_RIGHT).value == 0.0
    dA, dB, geom = detector_pair(3.0, z, z, 1.0, 1.0)
    assert condition_margin(dA, dB, geom, FieldModel.DIRAC_RIGHT)[0] == 0.0


def test_left_equals_right_exactly():
    dA, dB, geom = detector_pair(4.0, superosc_window(1.0, 4, 8.0), G, 0.5, 2.0)
    r = compute_amplitudes(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    left = compute_amplitudes(dA, dB, geom, FieldModel.DIRAC_LEFT)
    assert r == left


def test_emission_paths_agree():
    d = DetectorSpec(2.0, G)
    one = emission_norm2(d, FieldModel.DIRAC_RIGHT)
    two = emission_norm2_2d(d, FieldModel.DIRAC_RIGHT)
    assert abs(one.value - two.value) <= 1e-6 * one.value
    abl = emission_norm2(d, FieldModel.DIRAC_SCALAR_ABLATED)
    assert abl.value == one.value


@pytest.mark.parametrize("gap,L", [(1.0, 3.0), (2.0, 3.0), (2.0, 5.0), (4.0, 8.0)])
def test_exchange_paths_agree(gap, L):
    dA, dB, geom = detector_pair(L, G, G, gap, gap)
    for model in (FieldModel.DIRAC_RIGHT, FieldModel.DIRAC_SCALAR_ABLATED):
        x = exchange_amplitude(dA, dB, geom, model, paths="both")
        assert x.paths_agree
        assert abs(x.value - x.value_2d) <= 1e-6 * abs(x.value)


def test_scale_invariance():
    lam = 2.0
    w1, w2 = gaussian_window(1.0), gaussian_window(lam)
    dA, dB, g1 = detector_pair(4.0, w1, w1, 1.5, 2.5)
    eA, eB, g2 = detector_pair(4.0 * lam, w2, w2, 1.5 / lam, 2.5 / lam)
    a1 = compute_amplitudes(dA, dB, g1, FieldModel.DIRAC_RIGHT, cross=False)
    a2 = compute_amplitudes(eA, eB, g2, FieldModel.DIRAC_RIGHT, cross=False)
    assert abs(a2.x_ab - a1.x_ab * lam ** -4) <= 1e-10 * abs(a1.x_ab * lam ** -4)
    r1 = abs(a1.x_ab) ** 2 / (a1.eA2 * a1.eB2)
    r2 = abs(a2.x_ab) ** 2 / (a2.eA2 * a2.eB2)
    assert abs(r1 - r2) <= 1e-10 * r1


def test_handedness_doubling():
    dA, dB, geom = detector_pair(5.0, superosc_window(1.0, 4, 10.0), G, 0.3, 4.0)
    r = compute_amplitudes(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    b = compute_amplitudes(dA, dB, geom, FieldModel.DIRAC_BOTH)
    for k in ("eA2", "eB2", "x_ab", "e_ab"):
        assert getattr(b, k) == 2 * getattr(r, k)
    mr, _ = condition_margin(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    mb, _ = condition_margin(dA, dB, geom, FieldModel.DIRAC_BOTH)
    assert abs(mb - 4 * mr) <= 1e-14 * abs(4 * mr)


def test_gaussian_far_apart_not_entangled():
    dA, dB, geom = detector_pair(10.0, G, G, 2.0, 2.0)
    m, err = condition_margin(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    assert m < 0 and abs(m) > 3 * err


def test_cross_emission_limits():
    dA, dB, geom = detector_pair(50.0, G, G, 1.0, 1.0)
    e = cross_emission(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    assert abs(e.value) < 1e-3 * emission_norm2(dA, FieldModel.DIRAC_RIGHT).value
    dA, dB, geom = detector_pair(1e-3, G, G, 1.0, 1.0, causal=False)
    e = cross_emission(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    n = emission_norm2(dA, FieldModel.DIRAC_RIGHT).value
    assert abs(e.value - n) <= 0.01 * n


def test_geometry_validation():
    with pytest.raises(ValueError):
        GeometrySpec(2.0, 1.0, causal=True)
    GeometrySpec(2.0, 1.0, causal=False)
    with pytest.raises(ValueError):
        DetectorSpec(-1.0, G)
    dA = DetectorSpec(1.0, G)
    dB = DetectorSpec(1.0, G, (0, 0, 4.0))
    with pytest.raises(ValueError):
        exchange_amplitude(dA, dB, GeometrySpec(5.0), FieldModel.DIRAC_RIGHT)


def test_amplitude_set_validation():
    with pytest.raises(ValueError):
        AmplitudeSet(-1.0, 0.0, 0j, 0j)
    with pytest.raises(ValueError):
        AmplitudeSet(math.nan, 0.0, 0j, 0j)


def test_kg_exchange_matches_direct_quadrature():
    from scipy.integrate import quad
    dA, dB, geom = detector_pair(5.0, G, G, 1.0, 1.0)
    x = exchange_amplitude(dA, dB, geom, FieldModel.KLEIN_GORDON)
    f = lambda w: math.sin(5 * w) / 5 * G.transform(1 + w) * G.transform(1 - w)  # noqa: E731
    ref = quad(f, 0, 20, limit=400, epsabs=0, epsrel=1e-12)[0]
    assert abs(x.value - ref) <= 1e-9 * abs(ref)
