"""Coupling windows and their frequency transforms.

Transform convention: ``ft(nu) = int dt eps(t) exp(i nu t)``.  All windows
are even in time, so their transforms are real and even.

Two families are provided:

* ``gaussian`` -- ``eps0 * exp(-t^2 / 2T^2)``.
* ``superosc`` -- a comb of narrow Gaussian spikes whose transform is
  ``eps0 * T * Re[(cos(nu d) + i a sin(nu d))^N] * exp(-nu^2 s^2 / 2)`` with
  ``d = T / 2N``.  Near ``nu = 0`` the bracket behaves as ``cos(a N d nu)``,
  i.e. it oscillates ``a`` times faster than its fastest Fourier component
  ``T / 2``.

Either family may be modulated by ``cos(nu0 t)``, which replaces the
transform with the average of its copies shifted to ``nu -/+ nu0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import comb as binom

GAUSSIAN = "gaussian"
SUPEROSC = "superosc"
FAMILIES = (GAUSSIAN, SUPEROSC)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SuperoscParams:
    """Knobs of the comb construction.

    ``N`` is the (even) polynomial order, ``a >= 1`` the speed-up factor,
    ``delta = T / 2N`` the spike spacing unit and ``sigma`` the spike width.
    """

    N: int
    a: float
    delta: float
    sigma: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise ValueError(f"order N must be an even integer >= 2, got {self.N}")
        if not self.a >= 1.0:
            raise ValueError(f"speed-up a must be >= 1, got {self.a}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0 < self.sigma < self.delta / 3.0:
            raise ValueError(f"need 0 < sigma < delta/3 = {self.delta / 3.0}, got {self.sigma}")


@dataclass(frozen=True)
class WindowProfile:
    family: str = GAUSSIAN
    eps0: float = 1.0
    T: float = 1.0
    nu0: float = 0.0
    superosc: Optional[SuperoscParams] = None
    band_halfwidth: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown window family {self.family!r}")
        if not self.T > 0:
            raise ValueError("duration T must be positive")
        if self.nu0 < 0:
            raise ValueError("modulation frequency nu0 must be >= 0")
        if not math.isfinite(self.eps0):
            raise ValueError("eps0 must be finite")
        if self.family == SUPEROSC:
            if self.superosc is None:
                raise ValueError("superosc window needs SuperoscParams")
            if not math.isclose(self.superosc.delta, self.T / (2 * self.superosc.N), rel_tol=1e-12):
                raise ValueError("delta must equal T / 2N")

    # thin method aliases so windows can be passed around as callables
    def time(self, t):
        return eval_time(self, t)

    def transform(self, nu):
        return eval_transform(self, nu)

    def envelope(self, nu):
        return envelope_bound(self, nu)

    def scaled(self, factor: float) -> "WindowProfile":
        """Same shape with coupling ``eps0`` multiplied by ``factor``."""
        return replace(self, eps0=self.eps0 * factor)

    @property
    def oscillation_scale(self) -> float:
        """Largest time offset present in the window; sets transform oscillation rate."""
        if self.family == SUPEROSC:
            return self.T
        return 0.0

    def to_dict(self) -> dict:
        d = {"family": self.family, "eps0": self.eps0, "T": self.T, "nu0": self.nu0}
        if self.superosc is not None:
            d.update(N=int(self.superosc.N), a=self.superosc.a, sigma=self.superosc.sigma)
        return d


def gaussian_window(T: float = 1.0, eps0: float = 1.0, nu0: float = 0.0) -> WindowProfile:
    return WindowProfile(GAUSSIAN, eps0=eps0, T=T, nu0=nu0)


def superosc_window(T: float, N: int, a: float, sigma: Optional[float] = None,
                    nu0: float = 0.0, eps0: float = 1.0) -> WindowProfile:
    """Comb window; ``sigma`` defaults to a quarter of the spike spacing unit."""
    delta = T / (2 * N)
    if sigma is None:
        sigma = delta / 4.0
    return WindowProfile(SUPEROSC, eps0=eps0, T=T, nu0=nu0,
                         superosc=SuperoscParams(int(N), float(a), delta, float(sigma)))


def window_from_dict(d: dict) -> WindowProfile:
    d = dict(d)
    family = d.pop("family", GAUSSIAN)
    if family == GAUSSIAN:
        return gaussian_window(**d)
    if family == SUPEROSC:
        L = d.pop("L", None)
        if L is not None:
            return synthesize_superosc(L=L, **d)
        return superosc_window(**d)
    raise ValueError(f"unknown window family {family!r}")


def comb_polynomial(p: SuperoscParams, nu):
    """Complex ``(cos(nu d) + i a sin(nu d))^N`` via modulus and phase."""
    x = np.asarray(nu, dtype=float) * p.delta
    re, im = np.cos(x), p.a * np.sin(x)
    mod = np.hypot(re, im) ** p.N
    phase = p.N * np.arctan2(im, re)
    return mod * np.exp(1j * phase)


def spike_train(p: SuperoscParams):
    """Positions and (symmetrised) weights of the comb's time-domain spikes."""
    k = np.arange(p.N + 1)
    c = binom(p.N, k) * ((1.0 + p.a) / 2.0) ** k * ((1.0 - p.a) / 2.0) ** (p.N - k)
    weights = 0.5 * (c + c[::-1])
    positions = (2 * k - p.N) * p.delta
    return positions, weights


def _base_time(w: WindowProfile, t):
    if w.family == GAUSSIAN:
        return w.eps0 * np.exp(-0.5 * (t / w.T) ** 2)
    p = w.superosc
    pos, wts = spike_train(p)
    z = (t[..., None] - pos) / p.sigma
    spikes = np.exp(-0.5 * z * z) / (p.sigma * _SQRT_2PI)
    return w.eps0 * w.T * (spikes @ wts)


def _base_transform(w: WindowProfile, nu):
    if w.family == GAUSSIAN:
        return w.eps0 * w.T * _SQRT_2PI * np.exp(-0.5 * (nu * w.T) ** 2)
    p = w.superosc
    return w.eps0 * w.T * comb_polynomial(p, nu).real * np.exp(-0.5 * (nu * p.sigma) ** 2)


def _base_envelope(w: WindowProfile, nu):
    if w.family == GAUSSIAN:
        return abs(w.eps0) * w.T * _SQRT_2PI * np.exp(-0.5 * (nu * w.T) ** 2)
    p = w.superosc
    return (abs(w.eps0) * w.T * (1.0 + p.a ** 2) ** (p.N / 2.0)
            * np.exp(-0.5 * (nu * p.sigma) ** 2))


def eval_time(w: WindowProfile, t):
    """Coupling density ``eps(t)``."""
    t = np.asarray(t, dtype=float)
    out = _base_time(w, t)
    if w.nu0:
        out = out * np.cos(w.nu0 * t)
    return out


def eval_transform(w: WindowProfile, nu):
    """Real, even frequency transform ``ft(nu)``."""
    nu = np.asarray(nu, dtype=float)
    if w.nu0:
        return 0.5 * (_base_transform(w, nu - w.nu0) + _base_transform(w, nu + w.nu0))
    return _base_transform(w, nu)


def envelope_bound(w: WindowProfile, nu):
    """Upper bound on ``|ft(nu)|``, decaying monotonically beyond the band."""
    nu = np.asarray(nu, dtype=float)
    if w.nu0:
        return 0.5 * (_base_envelope(w, nu - w.nu0) + _base_envelope(w, nu + w.nu0))
    return _base_envelope(w, nu)


def zero_crossings(w: WindowProfile, L: float, centre: float = 0.0, span: Optional[float] = None):
    """Zeros of the comb's real part above ``centre``, located to machine precision.

    Only the unmodulated comb factor is examined; the Gaussian smoothing has
    no zeros.
    """
    p = w.superosc
    if span is None:
        span = math.pi / (2.0 * p.delta)
    step = (math.pi / L) / 40.0
    g = lambda v: float(comb_polynomial(p, v).real)  # noqa: E731
    grid = np.arange(0.0, span + step, step)
    vals = comb_polynomial(p, grid).real
    zeros = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        zeros.append(brentq(g, grid[i], grid[i + 1], xtol=1e-15))
    return centre + np.array(zeros)


def measure_band(w: WindowProfile, L: float, tolerance: float = 0.1) -> float:
    """Largest offset from the band centre with zero spacing within ``tolerance`` of pi/L."""
    z = zero_crossings(w, L)
    if z.size == 0:
        return 0.0
    target = math.pi / L
    # the transform is even, so the first spacing is between -z[0] and z[0]
    spacings = np.concatenate([[2.0 * z[0]], np.diff(z)])
    ok = np.abs(spacings - target) <= tolerance * target
    if not ok[0]:
        return 0.0
    bad = np.nonzero(~ok)[0]
    last = z.size - 1 if bad.size == 0 else bad[0] - 1
    return float(z[last])


def synthesize_superosc(L: float, T: float = 1.0, N: int = 20, sigma: Optional[float] = None,
                        nu0: float = 0.0, eps0: float = 1.0) -> WindowProfile:
    """Comb window whose transform oscillates as ``cos(nu L)`` near its band centre.

    The speed-up is ``a = 2L / T``, so ``a N delta = L``.  ``L`` must be at
    least ``T / 2`` (``a = 1`` is the plain phase case with no
    superoscillation).  The measured band half-width is attached to the
    returned window.
    """
    if not L >= T / 2.0:
        raise ValueError(f"need L >= T/2 for a >= 1, got L={L}, T={T}")
    w = superosc_window(T=T, N=N, a=2.0 * L / T, sigma=sigma, nu0=nu0, eps0=eps0)
    return replace(w, band_halfwidth=measure_band(w, L))


def superosc_penalty(w: WindowProfile) -> float:
    """Peak of the comb's real part over a full period, relative to its band-centre value."""
    p = w.superosc
    nu = np.linspace(0.0, math.pi / p.delta, 20001)
    return float(np.max(np.abs(comb_polynomial(p, nu).real)))
