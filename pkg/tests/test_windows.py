import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from vacuum_entanglement.windows import (SuperoscParams, comb_polynomial, gaussian_window,
                                         measure_band, spike_train, superosc_penalty,
                                         superosc_window, synthesize_superosc, window_from_dict,
                                         zero_crossings)

windows = st.one_of(
    st.builds(gaussian_window, T=st.floats(0.3, 3.0), eps0=st.floats(0.1, 2.0),
              nu0=st.floats(0.0, 5.0)),
    st.builds(lambda N, a, nu0: superosc_window(1.0, 2 * N, a, nu0=nu0),
              st.integers(1, 6), st.floats(1.0, 4.0), st.floats(0.0, 5.0)),
)


def _support(w):
    """Integration range and breakpoints covering the whole time profile."""
    if w.superosc:
        return w.T, list(spike_train(w.superosc)[0])
    return 12.0 * w.T, None


@given(windows, st.floats(-30.0, 30.0))
def test_transform_even(w, nu):
    a, b = w.transform(nu), w.transform(-nu)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@given(windows, st.floats(0.0, 60.0))
def test_envelope_bounds_transform(w, nu):
    assert abs(w.transform(nu)) <= w.envelope(nu) * (1 + 1e-12) + 1e-300


@pytest.mark.parametrize("w", [gaussian_window(1.3, 0.7), gaussian_window(1.0, nu0=2.0),
                               superosc_window(1.0, 4, 2.5), superosc_window(1.0, 6, 3.0, nu0=1.5)])
def test_parseval(w):
    lim, pts = _support(w)
    tnorm = quad(lambda t: w.time(t) ** 2, -lim, lim, points=pts, limit=2000,
                 epsabs=0, epsrel=1e-12)[0]
    cut = 40.0 / (w.superosc.sigma if w.superosc else w.T)
    fnorm = 2 * quad(lambda v: w.transform(v) ** 2, 0, cut, limit=5000, epsabs=0,
                     epsrel=1e-12)[0] / (2 * math.pi)
    assert abs(tnorm - fnorm) <= 1e-6 * tnorm


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("w", [gaussian_window(0.8), superosc_window(1.0, 4, 3.0),
                               superosc_window(1.0, 2, 1.7, nu0=0.9)])
@pytest.mark.parametrize("nu", [0.0, 0.7, 3.1, 11.0])
def test_closed_form_transform_matches_time_domain(w, nu):
    lim, pts = _support(w)
    num = quad(lambda t: w.time(t) * math.cos(nu * t), -lim, lim, points=pts,
               limit=2000, epsabs=1e-15, epsrel=1e-12)[0]
    scale = float(w.envelope(0.0))
    assert abs(num - float(w.transform(nu))) <= 1e-9 * scale


def test_gaussian_transform_value():
    w = gaussian_window(2.0, 0.5)
    assert math.isclose(w.transform(0.0), 0.5 * 2.0 * math.sqrt(2 * math.pi), rel_tol=1e-15)


def test_spike_weights_reproduce_polynomial():
    p = superosc_window(1.0, 6, 2.2).superosc
    pos, wts = spike_train(p)
    nu = np.linspace(0, 40, 17)
    direct = (wts[None, :] * np.cos(np.outer(nu, pos))).sum(axis=1)
    assert np.allclose(direct, comb_polynomial(p, nu).real, rtol=0, atol=1e-9 * (1 + 2.2 ** 2) ** 3)


def test_spike_support_bound():
    # spikes sit inside [-T/2, T/2]; beyond T/2 + 6 sigma the density is below
    # the Gaussian-tail bound sum|w| e^{-18} / (sigma sqrt(2 pi))
    w = superosc_window(1.0, 8, 3.0)
    p = w.superosc
    pos, wts = spike_train(p)
    assert np.max(np.abs(pos)) <= w.T / 2 + 1e-15
    t = np.linspace(w.T / 2 + 6 * p.sigma, 2.0, 200)
    bound = w.T * np.abs(wts).sum() * math.exp(-18.0) / (p.sigma * math.sqrt(2 * math.pi))
    assert np.all(np.abs(w.time(t)) <= bound)
    assert np.all(np.abs(w.time(-t)) <= bound)


def test_superosc_params_validation():
    with pytest.raises(ValueError):
        SuperoscParams(3, 2.0, 1 / 6, 0.01)
    with pytest.raises(ValueError):
        SuperoscParams(4, 0.5, 1 / 8, 0.01)
    with pytest.raises(ValueError):
        SuperoscParams(4, 2.0, 1 / 8, 0.05)
    with pytest.raises(ValueError):
        gaussian_window(T=0.0)


def test_plain_phase_case_spacing():
    # a = 1: the comb is cos(nu T/2)^... with zero spacing 2 pi / T
    w = synthesize_superosc(L=0.5, T=1.0, N=10)
    z = zero_crossings(w, 0.5)
    assert np.allclose(np.diff(z[:4]), 2 * math.pi, rtol=1e-9)


def test_band_spacing_matches_target():
    L = 5.0
    w = synthesize_superosc(L, T=1.0, N=20)
    z = zero_crossings(w, L)
    assert abs(2 * z[0] - math.pi / L) <= 0.1 * math.pi / L
    assert w.band_halfwidth > 0.5
    assert measure_band(w, L) == w.band_halfwidth


def test_synthesis_requires_long_separation():
    with pytest.raises(ValueError):
        synthesize_superosc(0.3, T=1.0)


def test_penalty_grows_with_order():
    assert superosc_penalty(superosc_window(1.0, 8, 4.0)) > superosc_penalty(superosc_window(1.0, 4, 4.0))


def test_dict_round_trip():
    w = superosc_window(1.0, 6, 2.5, nu0=0.3, eps0=0.4)
    d = w.to_dict()
    assert window_from_dict(d) == w
    g = gaussian_window(1.5, 0.2, 1.0)
    assert window_from_dict(g.to_dict()) == g


def test_scaled_is_linear():
    w = superosc_window(1.0, 4, 2.0)
    assert w.scaled(3.0).transform(1.3) == pytest.approx(3.0 * w.transform(1.3), rel=1e-15)
