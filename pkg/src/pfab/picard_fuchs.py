"""Picard-Fuchs systems V = A(h) V' for the basis integrals.

The matrices are kept exactly (entries in Q(h)) and are checked against
quadrature: V comes from :func:`pfab.quadrature.integral_I`, V' from central
differences with one Richardson step.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .polyrat import Poly, PolyRat
from .quadrature import IntegralIndex, integral_I
from .reduction import BASIS
from .systems import SystemKind, SystemSpec, branch_of

__all__ = [
    "PFSystem",
    "pf_system",
    "pf_matrix",
    "basis_vector",
    "pf_residual",
    "derivative_identity_residual",
]

F = Fraction


def _r(*num, den=(1,)) -> PolyRat:
    return PolyRat(Poly([F(c) for c in num]), Poly([F(c) for c in den]))


@dataclass(frozen=True)
class PFSystem:
    """V = A(h) V' with V the basis vector ``basis`` (ordered as in ``BASIS``)."""

    kind: SystemKind
    basis: tuple
    entries: tuple  # rows of PolyRat
    singular: tuple  # h where A has a pole or det A = 0

    @property
    def size(self) -> int:
        return len(self.basis)

    def __call__(self, h) -> np.ndarray:
        return np.array([[float(e(F(h) if isinstance(h, (int, Fraction)) else h)) for e in row]
                         for row in self.entries])

    def det(self) -> PolyRat:
        # cofactor expansion is fine at this size
        def det(rows):
            if len(rows) == 1:
                return rows[0][0]
            total = PolyRat.zero()
            for c, a in enumerate(rows[0]):
                if a:
                    minor = [r[:c] + r[c + 1:] for r in rows[1:]]
                    term = a * det(minor)
                    total = total + term if c % 2 == 0 else total - term
            return total

        return det([list(r) for r in self.entries])


@lru_cache(maxsize=None)
def _pf(kind: SystemKind) -> PFSystem:
    z = PolyRat.zero()
    if kind is SystemKind.S1:
        d = (1, 2)  # common factor 1/(2h+1)
        rows = (
            (_r(0, 2, 2, den=d), z, z, z),
            (z, _r(F(1, 2), 2, 2, den=d), _r(F(-1, 2), den=d), z),
            (z, z, _r(0, 1, 1, den=d), z),
            (_r(0, -2, -2, den=d), z, z, _r(F(1, 2), 2, 2, den=d)),
        )
        sing = (F(-1), F(-1, 2), F(0))
    elif kind is SystemKind.S2:
        rows = (
            (_r(0, 1), z, z, z),
            (z, _r(0, 2), z, z),
            (_r(2), z, _r(-2, 2), z),
            (z, _r(0, 4), z, _r(-1, 1)),
        )
        sing = (F(0), F(1))
    else:
        # r19 and r20 share the same matrix
        c = _r(F(-1, 64))
        rows = (
            (_r(0, 1), c, z),
            (c, _r(0, 1), z),
            (z, z, _r(F(-1, 4096), 0, 1, den=(0, 1))),
        )
        sing = (F(-1, 64), F(0), F(1, 64))
    basis = tuple(IntegralIndex(i, j) for i, j in BASIS[kind])
    return PFSystem(kind, basis, rows, sing)


def pf_system(sys: SystemSpec) -> PFSystem:
    return _pf(sys.kind)


def _check(sys: SystemSpec, h: float):
    pf = _pf(sys.kind)
    for s in pf.singular:
        if abs(h - float(s)) <= 1e-12 * max(1.0, abs(float(s))):
            raise DomainError(f"h={h} is a singular point of the Picard-Fuchs system")
    return pf


def pf_matrix(sys: SystemSpec, h: float) -> np.ndarray:
    """Numeric A(h).

    Examples
    --------
    >>> from pfab.systems import make_system
    >>> pf_matrix(make_system("s2"), 0.5)[2].tolist()
    [2.0, 0.0, -1.0, 0.0]
    """
    h = float(h)
    branch_of(sys, h)
    return _check(sys, h)(h)


def basis_vector(sys: SystemSpec, h: float, rtol: float = 1e-13) -> np.ndarray:
    pf = _pf(sys.kind)
    return np.array([integral_I(sys, h, idx, rtol=rtol) for idx in pf.basis])


def _richardson(f, h, step):
    d1 = (f(h + step) - f(h - step)) / (2 * step)
    s2 = 0.5 * step
    d2 = (f(h + s2) - f(h - s2)) / (2 * s2)
    return (4 * d2 - d1) / 3


def _check_stencil(sys, h, step):
    iv = branch_of(sys, h)
    if step is None:
        # the integrals have sqrt-type singularities at the edges of Sigma,
        # so the stencil must shrink with the distance to the nearest edge
        dist = min(abs(h - e) for e in (iv.lo, iv.hi) if np.isfinite(e))
        step = min(1e-4 * max(1.0, abs(h)), 1e-2 * dist)
    for x in (h - step, h + step):
        if not iv.contains(x):
            raise DomainError(f"stencil point {x} leaves the annulus of h={h}")
    return step


def pf_residual(sys: SystemSpec, h: float, step: float | None = None) -> float:
    """max|V - A(h) V'| / max|V| with V' from Richardson-extrapolated differences.

    ``step=None`` picks min(1e-4 max(1, |h|), dist(h, boundary)/100).
    """
    h = float(h)
    A = pf_matrix(sys, h)
    step = _check_stencil(sys, h, step)
    V = basis_vector(sys, h)
    dV = _richardson(lambda x: basis_vector(sys, x), h, step)
    return float(np.max(np.abs(V - A @ dV)) / np.max(np.abs(V)))


def derivative_identity_residual(sys: SystemSpec, h: float, i, j: int, step: float | None = None) -> float:
    """Relative defect of I_{i,j} = I'_{i-k,j+2} / (j+2)."""
    h = float(h)
    step = _check_stencil(sys, h, step)
    idx = IntegralIndex.of(i, j)
    lower = IntegralIndex(idx.i - sys.k, j + 2)
    lhs = integral_I(sys, h, idx, rtol=1e-13)
    d = _richardson(lambda x: integral_I(sys, x, lower, rtol=1e-13), h, step)
    return abs(lhs - d / (j + 2)) / abs(lhs)
