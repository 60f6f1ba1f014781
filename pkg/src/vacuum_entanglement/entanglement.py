"""Partially transposed two-detector state, Peres test and negativity.

Basis order is ``(dd, du, ud, uu)`` (first letter detector A).  To second
order in the couplings the partial transpose is block diagonal in the pairs
``(dd, uu)`` and ``(du, ud)``::

    [[1 - eA2 - eB2, 0,      0,      <E_A|E_B>],
     [0,             eB2,    -x,     0        ],
     [0,             -x*,    eA2,    0        ],
     [<E_B|E_A>,     0,      0,      |X|^2    ]]

with ``x = <0|X_AB>``.  ``|X|^2`` is fourth order and not available from
the reduced amplitudes; it is replaced by its vacuum projection ``|x|^2``,
a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import AmplitudeSet, margin_from_amplitudes

INNER = (1, 2)
OUTER = (0, 3)


@dataclass(frozen=True)
class PTMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError("partial transpose must be 4x4")
        if not np.allclose(m, m.conj().T, rtol=0, atol=1e-14):
            raise ValueError("partial transpose must be Hermitian")
        object.__setattr__(self, "matrix", m)

    def block(self, which) -> np.ndarray:
        idx = np.array(which)
        return self.matrix[np.ix_(idx, idx)]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class EntanglementReport:
    peres_violated: bool
    negativity: float
    min_eigenvalue: float
    margin: float
    eigenvalues: tuple = ()
    negativity_err: float = 0.0
    min_eigenvalue_err: float = 0.0
    margin_err: float = 0.0
    outer_block_negative: bool = False

    def to_dict(self) -> dict:
        return {
            "peres_violated": self.peres_violated,
            "negativity": self.negativity, "negativity_err": self.negativity_err,
            "min_eigenvalue": self.min_eigenvalue, "min_eigenvalue_err": self.min_eigenvalue_err,
            "margin": self.margin, "margin_err": self.margin_err,
            "eigenvalues": list(self.eigenvalues),
            "outer_block_negative": self.outer_block_negative,
        }


def assemble_pt(amps: AmplitudeSet) -> PTMatrix:
    """Place the amplitudes into the second-order partial transpose."""
    if amps.eA2 + amps.eB2 >= 1.0:
        raise ValueError("eA2 + eB2 >= 1: outside the perturbative regime")
    x = complex(amps.x_ab)
    e = complex(amps.e_ab)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0 - amps.eA2 - amps.eB2
    m[0, 3] = e
    m[3, 0] = e.conjugate()
    m[1, 1] = amps.eB2
    m[2, 2] = amps.eA2
    m[1, 2] = -x
    m[2, 1] = -x.conjugate()
    m[3, 3] = abs(x) ** 2
    return PTMatrix(m)


def _block_eigs(a: float, d: float, off: complex):
    """Eigenvalues of the Hermitian block ``[[a, off], [off*, d]]``, ascending."""
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), abs(off))
    return mean - rad, mean + rad


def peres_test(m: PTMatrix, amps: AmplitudeSet | None = None) -> EntanglementReport:
    """Eigenvalues from the two 2x2 blocks; negativity sums the negative ones.

    If the generating amplitudes are supplied their error bars are
    propagated (first order) into the negativity, eigenvalue and margin.
    """
    M = m.matrix
    inner = _block_eigs(M[1, 1].real, M[2, 2].real, M[1, 2])
    outer = _block_eigs(M[0, 0].real, M[3, 3].real, M[0, 3])
    eigs = tuple(sorted(inner + outer))
    negativity = float(sum(-v for v in eigs if v < 0))
    x = abs(M[1, 2])
    margin = x * x - M[1, 1].real * M[2, 2].real
    neg_err = eig_err = margin_err = 0.0
    if amps is not None:
        margin, margin_err = margin_from_amplitudes(amps)
        eig_err = _inner_min_eig_err(amps)
        neg_err = eig_err if negativity > 0 else 0.0
    return EntanglementReport(
        peres_violated=negativity > 0,
        negativity=negativity,
        min_eigenvalue=float(eigs[0]),
        margin=float(margin),
        eigenvalues=eigs,
        negativity_err=neg_err,
        min_eigenvalue_err=eig_err,
        margin_err=margin_err,
        outer_block_negative=outer[0] < 0,
    )


def _inner_min_eig_err(amps: AmplitudeSet) -> float:
    # d/d(eA2), d/d(eB2), d/d|x| of (eA+eB)/2 - sqrt(((eA-eB)/2)^2 + |x|^2)
    half = 0.5 * (amps.eA2 - amps.eB2)
    x = abs(amps.x_ab)
    rad = math.hypot(half, x)
    if rad == 0:
        return 0.5 * (amps.eA2_err + amps.eB2_err) + amps.x_ab_err
    da = abs(0.5 - 0.5 * half / rad)
    db = abs(0.5 + 0.5 * half / rad)
    dx = x / rad
    return da * amps.eA2_err + db * amps.eB2_err + dx * amps.x_ab_err


def leading_order_negativity(amps: AmplitudeSet) -> float:
    """Negativity of the inner block alone, the O(eps^2) shortcut.

    Evaluated as ``2 margin / (rad + eA2 + eB2)`` (algebraically equal to
    ``(rad - eA2 - eB2) / 2``) so its sign is exactly that of the margin.
    """
    x = abs(amps.x_ab)
    margin = x * x - amps.eA2 * amps.eB2
    if not margin > 0:
        return 0.0
    rad = math.sqrt((amps.eA2 - amps.eB2) ** 2 + 4.0 * x * x)
    return 2.0 * margin / (rad + (amps.eA2 + amps.eB2))


def leading_order_negativity_err(amps: AmplitudeSet) -> float:
    if leading_order_negativity(amps) == 0.0:
        return 0.0
    return _inner_min_eig_err(amps)


def entanglement_report(amps: AmplitudeSet) -> EntanglementReport:
    return peres_test(assemble_pt(amps), amps)
