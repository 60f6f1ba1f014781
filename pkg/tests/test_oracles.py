import math

import numpy as np
import pytest

from vacuum_entanglement.kernels import (DetectorSpec, FieldModel, angular_kernel,
                                         cross_emission, detector_pair, emission_norm2,
                                         exchange_amplitude, ablated_angular_kernel)
from vacuum_entanglement.oracles import (angular_integral, brute_force_cross,
                                         brute_force_emission, brute_force_exchange)
from vacuum_entanglement.windows import gaussian_window

G = gaussian_window(1.0)


def test_angular_integral_closed_form_grid():
    p = np.array([0.3, 1.0, 2.5])
    q = np.array([0.7, 1.9])
    num = angular_integral(p, q, 3.0, n_theta=64).real
    ref = 8 * math.pi ** 2 * angular_kernel(p[:, None], q[None, :], 3.0) / np.outer(p, q) ** 2
    assert np.allclose(num, ref, rtol=1e-10, atol=1e-12)


def test_half_term_closed_form():
    num = angular_integral(1.0, 2.0, 3.0, n_theta=64, half_only=True)[0, 0].real
    ref = (4 * math.pi) ** 2 / 2 * ablated_angular_kernel(1.0, 2.0, 3.0) / 4.0
    assert abs(num - ref) <= 1e-6 * abs(ref)


@pytest.mark.parametrize("gap", [1.0, 2.0, 4.0])
def test_emission_oracle(gap):
    d = DetectorSpec(gap, G)
    ref = brute_force_emission(d)
    analytic = brute_force_emission(d, angular=False)
    val = emission_norm2(d, FieldModel.DIRAC_RIGHT).value
    assert abs(val - ref.value) <= 1e-6 * val
    assert abs(val - analytic.value) <= 1e-6 * val
    left = brute_force_emission(d, FieldModel.DIRAC_LEFT)
    assert abs(left.value - ref.value) <= 1e-12 * ref.value


@pytest.mark.parametrize("gap,L", [(1.0, 3.0), (2.0, 5.0), (4.0, 8.0)])
def test_exchange_and_cross_oracle(gap, L):
    dA, dB, geom = detector_pair(L, G, G, gap, gap + 0.5)
    x = exchange_amplitude(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    ref = brute_force_exchange(dA, dB, geom)
    assert abs(x.value - ref.value) <= 1e-5 * abs(ref.value)
    e = cross_emission(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    ref = brute_force_cross(dA, dB, geom)
    assert abs(e.value - ref.value) <= 1e-5 * abs(ref.value)


def test_left_handed_oracle_matches_right():
    dA, dB, geom = detector_pair(3.0, G, G, 1.0, 1.0)
    r = brute_force_exchange(dA, dB, geom, FieldModel.DIRAC_RIGHT)
    left = brute_force_exchange(dA, dB, geom, FieldModel.DIRAC_LEFT)
    assert abs(r.value - left.value) <= 1e-10 * abs(r.value)


def test_ablated_oracle():
    dA, dB, geom = detector_pair(3.0, G, G, 1.0, 1.0)
    x = exchange_amplitude(dA, dB, geom, FieldModel.DIRAC_SCALAR_ABLATED)
    ref = brute_force_exchange(dA, dB, geom, FieldModel.DIRAC_SCALAR_ABLATED)
    assert abs(x.value - ref.value) <= 1e-5 * abs(ref.value)


def test_oracle_rejects_scalar_field():
    with pytest.raises(ValueError):
        brute_force_emission(DetectorSpec(1.0, G), FieldModel.KLEIN_GORDON)
