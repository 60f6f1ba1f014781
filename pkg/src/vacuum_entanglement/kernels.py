"""Spectral kernels and second-order amplitudes for each field model.

Units: hbar = c = 1.  For the massless Dirac field (one handedness) the
amplitudes reduce to radial integrals over the pair momenta ``p, q``::

    |E_i|^2     =  C int dp dq p^2 q^2                ft_i(W_i + p + q)^2
    <0|X_AB>    = -C int dp dq K(p, q; L)  ft_A(W_A + p + q) ft_B(W_B - p - q)
    <E_A|E_B>   =  C int dp dq K(p, q; L)  ft_A(W_A + p + q) ft_B(W_B + p + q)

with ``C = 1 / (8 pi^4)`` and the angular kernel
``K = p^2 q^2 [j0(pL) j0(qL) - j1(pL) j1(qL)]``.  Integrating out
``p - q`` at fixed ``w = p + q`` gives the one-dimensional forms used on the
fast path: ``w^5 / 30`` for the emission and

    G(w; L) = -(w^3 / 6 L^2) [2 j2(wL) - wL j1(wL)]

for the exchange and cross terms.  Both paths are exposed and cross-checked.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import spherical_jn

from .quadrature import IntegrationSpec, QuadratureResult, integrate_1d, integrate_2d
from .windows import WindowProfile

PREFACTOR = 1.0 / (8.0 * math.pi ** 4)


class FieldModel(str, enum.Enum):
    DIRAC_RIGHT = "dirac_right"
    DIRAC_LEFT = "dirac_left"
    DIRAC_BOTH = "dirac_both"
    KLEIN_GORDON = "klein_gordon"
    DIRAC_SCALAR_ABLATED = "dirac_scalar_ablated"

    @property
    def multiplier(self) -> int:
        """Number of handedness sectors coupled (total charge density couples both)."""
        return 2 if self is FieldModel.DIRAC_BOTH else 1

    @property
    def is_dirac(self) -> bool:
        return self is not FieldModel.KLEIN_GORDON


@dataclass(frozen=True)
class DetectorSpec:
    gap: float
    window: WindowProfile
    position: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.gap >= 0:
            raise ValueError(f"energy gap must be >= 0, got {self.gap}")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        if len(self.position) != 3:
            raise ValueError("position must be a 3-vector")


@dataclass(frozen=True)
class GeometrySpec:
    """Detector separation ``L`` and window duration ``T``.

    With ``causal=True`` the separation must be at least ``3T``.
    """

    L: float
    T: float = 1.0
    causal: bool = True

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("separation L must be positive")
        if not self.T > 0:
            raise ValueError("duration T must be positive")
        if self.causal and self.L < 3.0 * self.T:
            raise ValueError(f"causal separation requires L >= 3T (L={self.L}, T={self.T})")

    @property
    def R(self) -> float:
        """Radius of the region each detector probes."""
        return self.T

    def check(self, dA: DetectorSpec, dB: DetectorSpec) -> None:
        dist = float(np.linalg.norm(np.subtract(dB.position, dA.position)))
        if not math.isclose(dist, self.L, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"detector positions are {dist} apart but geometry says L={self.L}")


def detector_pair(L: float, window_a: WindowProfile, window_b: WindowProfile,
                  gap_a: float, gap_b: float, causal: bool = True):
    """Detectors at the origin and at ``(0, 0, L)`` plus the matching geometry."""
    dA = DetectorSpec(gap_a, window_a, (0.0, 0.0, 0.0))
    dB = DetectorSpec(gap_b, window_b, (0.0, 0.0, L))
    T = max(window_a.T, window_b.T)
    return dA, dB, GeometrySpec(L, T, causal)


@dataclass(frozen=True)
class Estimate:
    value: complex | float
    error: float
    converged: bool = True
    value_2d: Optional[complex | float] = None
    error_2d: Optional[float] = None
    paths_agree: Optional[bool] = None
    truncation: Optional[float] = None

    def __float__(self):
        return float(np.real(self.value))


@dataclass(frozen=True)
class AmplitudeSet:
    eA2: float
    eB2: float
    x_ab: complex
    e_ab: complex
    eA2_err: float = 0.0
    eB2_err: float = 0.0
    x_ab_err: float = 0.0
    e_ab_err: float = 0.0
    converged: bool = True
    paths: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = (self.eA2, self.eB2, abs(self.x_ab), abs(self.e_ab))
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("amplitudes must be finite")
        if self.eA2 < 0 or self.eB2 < 0:
            raise ValueError("emission norms must be non-negative")

    def scaled(self, c: float) -> "AmplitudeSet":
        """All second-order amplitudes multiplied by ``c`` (e.g. handedness multiplicity)."""
        return AmplitudeSet(c * self.eA2, c * self.eB2, c * self.x_ab, c * self.e_ab,
                            c * self.eA2_err, c * self.eB2_err, c * self.x_ab_err,
                            c * self.e_ab_err, self.converged)

    def to_dict(self) -> dict:
        return {
            "eA2": self.eA2, "eA2_err": self.eA2_err,
            "eB2": self.eB2, "eB2_err": self.eB2_err,
            "x_ab": [self.x_ab.real, self.x_ab.imag], "x_ab_err": self.x_ab_err,
            "e_ab": [self.e_ab.real, self.e_ab.imag], "e_ab_err": self.e_ab_err,
            "converged": self.converged,
        }


# --------------------------------------------------------------------------
# spinors

def spinor_r(p) -> np.ndarray:
    """Unit right-handed spinor ``(px - i py, |p| - pz) / sqrt(2|p|(|p| - pz))``.

    Accepts a 3-vector or an ``(..., 3)`` array.  Along ``+z`` the limit
    ``(1, 0)`` is returned.
    """
    p = np.asarray(p, dtype=float)
    norm = np.linalg.norm(p, axis=-1)
    if np.any(norm == 0):
        raise ValueError("spinor undefined at zero momentum")
    px, py, pz = p[..., 0], p[..., 1], p[..., 2]
    upper = px - 1j * py
    # p - pz loses precision near +z; use (px^2 + py^2) / (p + pz) instead
    lower = np.where(pz <= 0, norm - pz,
                     (px * px + py * py) / np.where(pz <= 0, 1.0, norm + pz))
    n2 = np.abs(upper) ** 2 + lower ** 2
    out = np.empty(p.shape[:-1] + (2,), dtype=complex)
    singular = n2 <= (1e-300 + 0 * norm)
    safe = np.sqrt(np.where(singular, 1.0, n2))
    out[..., 0] = np.where(singular, 1.0, upper / safe)
    out[..., 1] = np.where(singular, 0.0, lower / safe)
    return out


def spinor_l(p) -> np.ndarray:
    """Left-handed spinor, ``u_l(p) = u_r(-p)``."""
    return spinor_r(-np.asarray(p, dtype=float))


def pauli_dot(p) -> np.ndarray:
    """``sigma . p`` as a 2x2 matrix."""
    px, py, pz = np.asarray(p, dtype=float)
    return np.array([[pz, px - 1j * py], [px + 1j * py, -pz]])


# --------------------------------------------------------------------------
# kernels

def angular_kernel(p, q, L):
    """``p^2 q^2 [j0(pL) j0(qL) - j1(pL) j1(qL)]``; symmetric in p and q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a, b = p * L, q * L
    j0 = spherical_jn(0, a) * spherical_jn(0, b)
    j1 = spherical_jn(1, a) * spherical_jn(1, b)
    return (p * q) ** 2 * (j0 - j1)


def ablated_angular_kernel(p, q, L):
    """Kernel from the 1/2 spinor term alone: ``p^2 q^2 j0(pL) j0(qL)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return (p * q) ** 2 * (spherical_jn(0, p * L) * spherical_jn(0, q * L))


def reduced_kernel(w, L):
    """``int_0^w dp K(p, w - p; L)`` in closed form."""
    w = np.asarray(w, dtype=float)
    x = w * L
    return -(w ** 3 / (6.0 * L * L)) * (2.0 * spherical_jn(2, x) - x * spherical_jn(1, x))


def reduced_ablated_kernel(w, L):
    """``int_0^w dp K_half(p, w - p; L)`` in closed form."""
    w = np.asarray(w, dtype=float)
    x = w * L
    return (w ** 3 / (12.0 * L * L)) * (x * spherical_jn(1, x) + spherical_jn(2, x))


def kg_kernel(w, L):
    """``sin(wL) / L`` written as ``w j0(wL)`` so that ``L -> 0`` is regular."""
    w = np.asarray(w, dtype=float)
    return w * spherical_jn(0, w * L)


def emission_weight(w, model: FieldModel):
    w = np.asarray(w, dtype=float)
    if model is FieldModel.KLEIN_GORDON:
        return w
    return w ** 5 / 30.0


def _kernel_bound(w, L, model):
    """``|G| <= w^5/30`` (angular average of a unit-bounded factor) and a large-L bound."""
    w = np.asarray(w, dtype=float)
    if model is FieldModel.KLEIN_GORDON:
        return w
    return np.minimum(w ** 5 / 30.0, w ** 3 * (2.0 + w * L) / (6.0 * L * L))


def _reduced(model, w, L):
    if model is FieldModel.KLEIN_GORDON:
        return kg_kernel(w, L)
    if model is FieldModel.DIRAC_SCALAR_ABLATED:
        return reduced_ablated_kernel(w, L)
    return reduced_kernel(w, L)


def _pq_kernel(model, p, q, L):
    if model is FieldModel.DIRAC_SCALAR_ABLATED:
        return ablated_angular_kernel(p, q, L)
    return angular_kernel(p, q, L)


def _norm(model: FieldModel) -> float:
    if model is FieldModel.KLEIN_GORDON:
        return 1.0
    return model.multiplier * PREFACTOR


# --------------------------------------------------------------------------
# amplitudes

@dataclass(frozen=True)
class Tolerances:
    rel_tol: float = 1e-10
    l1_tol: float = 1e-13
    path_rtol: float = 1e-6
    max_evals: int = 4_000_000


DEFAULT_TOL = Tolerances()


def _spec(envelope, osc, tol: Tolerances, upper=math.inf):
    return IntegrationSpec(0.0, upper, rel_tol=tol.rel_tol, l1_tol=tol.l1_tol,
                           osc_scale=osc, max_evals=tol.max_evals, envelope=envelope)


def _estimate(res: QuadratureResult, scale: float) -> Estimate:
    return Estimate(res.value * scale, abs(scale) * res.error_estimate, res.converged,
                    truncation=res.truncation)


def emission_norm2(d: DetectorSpec, model: FieldModel, tol: Tolerances = DEFAULT_TOL) -> Estimate:
    """``|E|^2`` for one detector via the ``p - q``-integrated one-dimensional form."""
    wnd, gap = d.window, d.gap
    f = lambda w: emission_weight(w, model) * wnd.transform(gap + w) ** 2  # noqa: E731
    env = lambda w: emission_weight(w, model) * wnd.envelope(gap + w) ** 2  # noqa: E731
    res = integrate_1d(f, _spec(env, 2.0 * wnd.oscillation_scale, tol))
    return _estimate(res, _norm(model))


def emission_norm2_2d(d: DetectorSpec, model: FieldModel, tol: Tolerances = DEFAULT_TOL) -> Estimate:
    """``|E|^2`` as the double radial integral over ``(p, q)``."""
    wnd, gap = d.window, d.gap
    cut = emission_norm2(d, model, tol).truncation
    if model is FieldModel.KLEIN_GORDON:
        raise ValueError("the Klein-Gordon emission is one-dimensional")
    if cut is None or cut <= 0:
        return Estimate(0.0, 0.0)
    f = lambda p, q: (p * q) ** 2 * wnd.transform(gap + p + q) ** 2  # noqa: E731
    osc = 2.0 * wnd.oscillation_scale
    res = integrate_2d(f, _spec(None, osc, tol, upper=cut),
                       lambda x: _spec(None, osc, tol, upper=max(cut - x, 1e-300)))
    return _estimate(res, _norm(model))


def _pair_amplitude(dA, dB, geom, model, sign_b, overall, paths, tol):
    """Shared driver for the exchange (``sign_b=-1``) and cross (``+1``) amplitudes."""
    geom.check(dA, dB)
    L = geom.L
    wa, wb = dA.window, dB.window
    ga, gb = dA.gap, dB.gap

    def f(w):
        return _reduced(model, w, L) * wa.transform(ga + w) * wb.transform(gb + sign_b * w)

    def env(w):
        return (_kernel_bound(w, L, model) * wa.envelope(ga + w)
                * wb.envelope(np.abs(gb + sign_b * w)))

    osc = L + wa.oscillation_scale + wb.oscillation_scale
    scale = overall * _norm(model)
    res = integrate_1d(f, _spec(env, osc, tol))
    est = _estimate(res, scale)
    if paths == "reduced" or model is FieldModel.KLEIN_GORDON:
        return est

    cut = res.truncation
    if cut is None or cut <= 0:
        return Estimate(est.value, est.error, est.converged, 0.0, 0.0, True, cut)

    def f2(p, q):
        s = p + q
        return _pq_kernel(model, p, q, L) * wa.transform(ga + s) * wb.transform(gb + sign_b * s)

    res2 = integrate_2d(f2, _spec(None, osc, tol, upper=cut),
                        lambda x: _spec(None, osc, tol, upper=max(cut - x, 1e-300)))
    v2 = res2.value * scale
    e2 = abs(scale) * res2.error_estimate
    diff = abs(v2 - est.value)
    agree = diff <= max(est.error + e2, tol.path_rtol * max(abs(est.value), abs(v2)))
    return Estimate(est.value, est.error, est.converged and res2.converged,
                    v2, e2, bool(agree), cut)


def exchange_amplitude(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                       model: FieldModel, paths: str = "reduced",
                       tol: Tolerances = DEFAULT_TOL) -> Estimate:
    """Vacuum-projected exchange amplitude ``<0|X_AB>``.

    ``paths="both"`` additionally evaluates the double ``(p, q)`` integral
    and records whether the two agree.  The Dirac amplitude carries the
    leading minus sign of the momentum-space expression; the Klein-Gordon one
    is returned with a plus sign.  Only ``|.|`` enters any criterion.
    """
    overall = 1.0 if model is FieldModel.KLEIN_GORDON else -1.0
    return _pair_amplitude(dA, dB, geom, model, -1.0, overall, paths, tol)


def cross_emission(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                   model: FieldModel, paths: str = "reduced",
                   tol: Tolerances = DEFAULT_TOL) -> Estimate:
    """Overlap ``<E_A|E_B>`` of the two single-detector emission states."""
    return _pair_amplitude(dA, dB, geom, model, +1.0, 1.0, paths, tol)


def compute_amplitudes(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                       model: FieldModel, paths: str = "reduced",
                       tol: Tolerances = DEFAULT_TOL, cross: bool = True) -> AmplitudeSet:
    """All four second-order amplitudes for one configuration."""
    eA = emission_norm2(dA, model, tol)
    eB = emission_norm2(dB, model, tol)
    x = exchange_amplitude(dA, dB, geom, model, paths, tol)
    e = cross_emission(dA, dB, geom, model, paths, tol) if cross else Estimate(0.0, 0.0)
    record = {}
    for name, est in (("x_ab", x), ("e_ab", e)):
        if est.value_2d is not None:
            record[name] = {"reduced": est.value, "double": est.value_2d,
                            "reduced_err": est.error, "double_err": est.error_2d,
                            "agree": est.paths_agree}
    converged = all(v.converged for v in (eA, eB, x, e))
    if paths == "both":
        converged &= all(v.paths_agree is not False for v in (x, e))
    return AmplitudeSet(float(eA), float(eB), complex(x.value), complex(e.value),
                        eA.error, eB.error, x.error, e.error, converged, record)


def condition_margin(dA: DetectorSpec, dB: DetectorSpec, geom: GeometrySpec,
                     model: FieldModel, tol: Tolerances = DEFAULT_TOL) -> Tuple[float, float]:
    """``|<0|X_AB>|^2 - |E_A|^2 |E_B|^2`` and its propagated error; positive means entangled."""
    amps = compute_amplitudes(dA, dB, geom, model, tol=tol, cross=False)
    return margin_from_amplitudes(amps)


def margin_from_amplitudes(amps: AmplitudeSet) -> Tuple[float, float]:
    x = abs(amps.x_ab)
    margin = x * x - amps.eA2 * amps.eB2
    err = (2.0 * x * amps.x_ab_err + amps.x_ab_err ** 2
           + amps.eA2 * amps.eB2_err + amps.eB2 * amps.eA2_err + amps.eA2_err * amps.eB2_err)
    return margin, err
