"""Brute-force reference values for the kernels module.

These evaluate the amplitudes directly from the spinor products: the
angular factor ``int dOmega_p dOmega_q |u(p)^dag u(q)|^2 exp(i (p + q) . L)``
is computed by tensor-product quadrature over three angles (``L`` along
``z``, the azimuth of ``p`` fixed by symmetry) using the actual spinors at
every node, then the radial ``(p, q)`` integral is done with composite
Gauss-Legendre.  Nothing here uses the adaptive quadrature or the closed
forms, so agreement with :mod:`vacuum_entanglement.kernels` is a genuine
cross-check.  Costs grow with ``L * cutoff``; keep grids small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .kernels import DetectorSpec, FieldModel, GeometrySpec, spinor_l, spinor_r

_TWO_PI6 = (2.0 * math.pi) ** 6


@dataclass(frozen=True)
class OracleValue:
    value: complex | float
    error: float


def angular_weights(n_theta: int, n_phi: int = 8, handedness: str = "right",
                    half_only: bool = False):
    """Matrix ``M`` with ``sum_ij M_ij e_i(p) e_j(q)`` equal to the angular integral.

    ``e_i(p) = exp(i p L cos theta_i)``.  Rows index ``theta_p``, columns
    ``theta_q``; the ``phi_q`` sum and the trivial ``phi_p`` factor ``2 pi``
    are folded in.  With ``half_only`` the spinor overlap is replaced by its
    constant part ``1/2``.
    """
    c, wc = leggauss(n_theta)
    s = np.sqrt(1.0 - c * c)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * math.pi / n_phi
    if half_only:
        overlap = np.full((n_theta, n_theta, n_phi), 0.5)
    else:
        spin = spinor_r if handedness == "right" else spinor_l
        phat = np.stack([s, np.zeros_like(s), c], axis=-1)
        qhat = np.stack([s[:, None] * np.cos(phi)[None, :],
                         s[:, None] * np.sin(phi)[None, :],
                         np.broadcast_to(c[:, None], (n_theta, n_phi))], axis=-1)
        up = spin(phat)                       # (i, 2)
        uq = spin(qhat)                       # (j, k, 2)
        amp = np.einsum("ia,jka->ijk", up.conj(), uq)
        overlap = np.abs(amp) ** 2
    M = 2.0 * math.pi * wphi * np.einsum("i,j,ijk->ij", wc, wc, overlap)
    return c, M


def angular_integral(p, q, L, n_theta: int = 96, n_phi: int = 8, handedness: str = "right",
                     half_only: bool = False):
    """Angular integral at arrays of ``p`` and ``q`` (outer product)."""
    c, M = angular_weights(n_theta, n_phi, handedness, half_only)
    Ep = np.exp(1j * np.outer(np.atleast_1d(p) * L, c))
    Eq = np.exp(1j * np.outer(np.atleast_1d(q) * L, c))
    return Ep @ M @ Eq.T


def _radial_rule(cut: float, L: float, order: int = 20, max_width: float = 0.25):
    width = max_width
    if L > 0:
        width = min(width, (2.0 * math.pi / L) / 4.0)
    n = max(1, int(math.ceil(cut / width)))
    edges = np.linspace(0.0, cut, n + 1)
    x, w = leggauss(order)
    half = 0.5 * np.diff(edges)
    nodes = (0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _cutoff(bound, start: float = 0.0, rel: float = 1e-18) -> float:
    span = 200.0
    while True:
        grid = start + np.linspace(0.0, span, 40001)
        vals = bound(grid)
        peak = vals.max()
        if peak == 0:
            return 0.0
        above = np.nonzero(vals > rel * peak)[0]
        if above[-1] < grid.size - 1:
            return float(grid[above[-1] + 1])
        span *= 2.0


def _n_theta(k_max: float) -> int:
    return int(0.75 * k_max) + 48


def _handedness(model: FieldModel) -> str:
    return "left" if model is FieldModel.DIRAC_LEFT else "right"


def brute_force_emission(d: DetectorSpec, model: FieldModel = FieldModel.DIRAC_RIGHT,
                         angular: bool = True, order: int = 20) -> OracleValue:
    """``|E|^2`` from the momentum-space double integral.

    With ``angular=False`` the angles are integrated analytically (the
    ``2 / (2 pi)^4`` form); otherwise the spinor-product angular integral is
    done numerically at ``L = 0``.
    """
    if model is FieldModel.KLEIN_GORDON:
        raise ValueError("brute-force oracle covers the Dirac models only")
    wnd, gap = d.window, d.gap
    cut = _cutoff(lambda w: w ** 5 * wnd.envelope(gap + w) ** 2)
    nodes, weights = _radial_rule(cut, 0.0, order)
    if angular:
        c, M = angular_weights(16, 8, _handedness(model), model is FieldModel.DIRAC_SCALAR_ABLATED)
        ang = float(M.sum())
        pref = ang / _TWO_PI6
    else:
        pref = 2.0 / (2.0 * math.pi) ** 4
    P, Q = np.meshgrid(nodes, nodes, indexing="ij")
    f = (P * Q) ** 2 * wnd.transform(gap + P + Q) ** 2
    val = model.multiplier * pref * float(weights @ f @ weights)
    coarse = _coarse_check(lambda P, Q: (P * Q) ** 2 * wnd.transform(gap + P + Q) ** 2,
                           cut, 0.0, order)
    err = abs(model.multiplier * pref * coarse - val)
    return OracleValue(val, err)


def _coarse_check(f, cut, L, order):
    nodes, weights = _radial_rule(cut, L, order - 4)
    P, Q = np.meshgrid(nodes, nodes, indexing="ij")
    return float(np.real(weights @ f(P, Q) @ weights))


def _brute_pair(dA, dB, geom, model, sign_b, order, n_phi):
    if model is FieldModel.KLEIN_GORDON:
        raise ValueError("brute-force oracle covers the Dirac models only")
    geom.check(dA, dB)
    L = geom.L
    wa, wb, ga, gb = dA.window, dB.window, dA.gap, dB.gap
    cut = _cutoff(lambda w: w ** 5 * wa.envelope(ga + w) * wb.envelope(np.abs(gb + sign_b * w)))
    if cut == 0.0:
        return 0j, 0.0
    results = []
    for n_theta, rule_order in ((_n_theta(2 * cut * L), order), (_n_theta(2 * cut * L) - 16, order - 4)):
        nodes, weights = _radial_rule(cut, L, rule_order)
        c, M = angular_weights(n_theta, n_phi, _handedness(model),
                               model is FieldModel.DIRAC_SCALAR_ABLATED)
        E = np.exp(1j * np.outer(nodes * L, c))
        ang = E @ M @ E.T
        P, Q = np.meshgrid(nodes, nodes, indexing="ij")
        S = P + Q
        f = (P * Q) ** 2 * ang * wa.transform(ga + S) * wb.transform(gb + sign_b * S)
        results.append(complex(weights @ f @ weights))
    val = model.multiplier * results[0] / _TWO_PI6
    err = model.multiplier * abs(results[0] - results[1]) / _TWO_PI6
    return val, err


def brute_force_exchange(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                         model: FieldModel = FieldModel.DIRAC_RIGHT, order: int = 20,
                         n_phi: int = 8) -> OracleValue:
    """``<0|X_AB>`` straight from the spinor-product momentum integral."""
    val, err = _brute_pair(dA, dB, geom, model, -1.0, order, n_phi)
    return OracleValue(-val, err)


def brute_force_cross(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                      model: FieldModel = FieldModel.DIRAC_RIGHT, order: int = 20,
                      n_phi: int = 8) -> OracleValue:
    """``<E_A|E_B>`` straight from the spinor-product momentum integral."""
    val, err = _brute_pair(dA, dB, geom, model, +1.0, order, n_phi)
    return OracleValue(val, err)
