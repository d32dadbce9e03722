"""Direct numerical evaluation of the generating integrals and of M(h).

The generating integrals are

    I_{i,j}(h) = int_{Gamma+_h} x**(i-k-1) y**j dx,
    J_{i,j}(h) = int_{Gamma-_h} x**(i-k-1) y**j dx,

over the upper (lower) half of the level oval H = h.  Each half is run in
the direction of the unperturbed flow, see :attr:`SigmaInterval.orientation`.

On every oval the half-energy factors as

    phi = C * u**pu * (w - w1) * (w2 - w),   u = |x|,  w = u**(1/q),

which lets the substitution u = a*exp(Lam*sin(theta)**2) (Lam = ln(b/a))
remove both square-root endpoint singularities while keeping w - w1 and
w2 - w free of cancellation.  The transformed integrand is smooth on
[0, pi/2] and handed to the adaptive Gauss-Kronrod kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import DomainError, NumericalError
from .systems import (
    PerturbationPoly,
    SigmaInterval,
    SystemKind,
    SystemSpec,
    branch_of,
    half_energy,
    rho_coefficients,
)

__all__ = [
    "OvalGeometry",
    "IntegralIndex",
    "oval_endpoints",
    "integral_I",
    "integral_J",
    "dy_integral",
    "melnikov_quadrature",
    "BOUNDARY_CUTOFF",
]

BOUNDARY_CUTOFF = 1e-9
DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-300


@dataclass(frozen=True)
class OvalGeometry:
    """x-intercepts x1 < x2 of the oval H = h on the given branch."""

    h: float
    branch: str
    x1: float
    x2: float


@dataclass(frozen=True, order=True)
class IntegralIndex:
    i: Fraction
    j: int

    def __post_init__(self):
        i = Fraction(self.i)
        if i.denominator not in (1, 2):
            raise DomainError(f"index i={i} must be an integer or a half-integer")
        if int(self.j) != self.j or self.j < 0:
            raise DomainError(f"index j={self.j!r} must be a nonnegative integer")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", int(self.j))

    @classmethod
    def of(cls, i, j) -> "IntegralIndex":
        if isinstance(i, str):
            i = Fraction(i)
        return cls(Fraction(i), j)

    def __str__(self):
        return f"I[{self.i},{self.j}]"


def _check_h(sys: SystemSpec, h: float) -> SigmaInterval:
    iv = branch_of(sys, h)
    for edge in (iv.lo, iv.hi):
        if math.isfinite(edge) and abs(h - edge) < BOUNDARY_CUTOFF * max(1.0, abs(edge)):
            raise DomainError(
                f"h={h!r} is within {BOUNDARY_CUTOFF:g} of the boundary {edge} of Sigma; "
                "refusing to integrate a degenerate oval"
            )
    return iv


@dataclass(frozen=True)
class _Param:
    """Everything the kernel needs about one oval, in u = |x| coordinates."""

    iv: SigmaInterval
    a: float  # smaller |x|-intercept
    b: float  # larger |x|-intercept
    sgn: float  # sign of x on the oval
    logC: float
    q: float
    pu: float


def _oval_param(sys: SystemSpec, h: float) -> _Param:
    iv = _check_h(sys, h)
    kind = sys.kind
    if kind is SystemKind.S1:
        s = math.sqrt(h * h + h)
        if iv.branch == "pos":
            # roots of x^2 - (4h+2) x + 1, product 1
            b = 2 * h + 1 + 2 * s
            a = 1.0 / b
            return _Param(iv, a, b, 1.0, math.log(0.25), 1.0, 0.0)
        # h < -1: roots of u^2 + (4h+2) u + 1 in u = -x
        b = -(2 * h + 1) + 2 * s
        a = 1.0 / b
        return _Param(iv, a, b, -1.0, math.log(0.25), 1.0, 0.0)
    if kind is SystemKind.S2:
        r = math.sqrt(h)
        return _Param(iv, 1.0 / (1.0 + r), 1.0 / (1.0 - r), 1.0, math.log1p(-h), 1.0, 0.0)
    # r19 / r20: w = sqrt(x) solves w^2 - 128 h w + 1 = 0
    S = math.sqrt(4096.0 * h * h - 1.0)
    w2 = 64.0 * h + S
    w1 = 1.0 / w2
    if kind is SystemKind.R19:
        return _Param(iv, w1 * w1, w2 * w2, 1.0, math.log(1.0 / 128.0), 2.0, 1.0)
    return _Param(iv, w1 * w1, w2 * w2, 1.0, math.log(1.0 / 128.0), 2.0, 0.0)


def _bisect_endpoints(sys: SystemSpec, h: float, iv: SigmaInterval):
    """Root-finding fallback: bracket both roots of phi outward from the centre.

    Every centre sits at |x| = 1 and phi < 0 both as x -> 0 and as
    |x| -> inf, so scaling the centre by powers of two brackets each root.
    """
    center = next(c for c in sys.centers if float(c.h) == iv.center_h)
    xc = float(center.x)

    def phi(x):
        return half_energy(sys, h, x)

    if not phi(xc) > 0:
        raise NumericalError(f"phi is not positive at the centre for h={h}")
    roots = []
    for factor in (0.5, 2.0):
        inner = xc
        for _ in range(2000):
            outer = inner * factor
            if phi(outer) < 0:
                break
            inner = outer
        else:
            raise NumericalError(f"could not bracket the oval endpoint for h={h}")
        lo, hi = sorted((inner, outer))
        roots.append(brentq(phi, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=500))
    x1, x2 = sorted(roots)
    return x1, x2


def oval_endpoints(sys: SystemSpec, h: float, method: str = "closed") -> OvalGeometry:
    """x-axis intersections of the oval at level ``h``.

    ``method='closed'`` uses the explicit root formulas (written in
    cancellation-free form); ``method='bisect'`` brackets the roots of phi
    starting from the centre, which is kept as an independent check.
    """
    h = float(h)
    p = _oval_param(sys, h)
    if method == "bisect":
        x1, x2 = _bisect_endpoints(sys, h, p.iv)
    elif method == "closed":
        if p.sgn > 0:
            x1, x2 = p.a, p.b
        else:
            x1, x2 = -p.b, -p.a
    else:
        raise DomainError(f"unknown endpoint method {method!r}")
    return OvalGeometry(h, p.iv.branch, x1, x2)


def _kernel_params(sys: SystemSpec, h: float, p: _Param, e: float, power: float, mode: int):
    par = np.zeros(K.NPARAM)
    par[K.P_LOGA] = math.log(p.a)
    par[K.P_LAM] = math.log(p.b / p.a)
    par[K.P_Q] = p.q
    par[K.P_E] = e
    par[K.P_P] = power
    par[K.P_LOGC] = p.logC
    par[K.P_PU] = p.pu
    par[K.P_MODE] = mode
    par[K.P_H] = h
    k, l2, l1, _ = sys.floats()
    par[K.P_K] = k
    par[K.P_L2] = l2
    par[K.P_L1] = l1
    par[K.P_SGN] = p.sgn
    return par


def _integrate(par, rtol, atol, what):
    val, err, status, nseg = K.adaptive_gk(par, 0.0, 0.5 * math.pi, rtol, atol, K.MAXSEG)
    if status != 0 or not math.isfinite(val):
        raise NumericalError(f"quadrature of {what} did not converge (estimate {val}, error {err})")
    return val


def _sgn_pow(sgn: float, e: Fraction) -> float:
    if sgn > 0:
        return 1.0
    if e.denominator != 1:
        raise DomainError(f"negative x with non-integer exponent {e}")
    return -1.0 if int(e) % 2 else 1.0


def _raw_upper(sys, h, idx: IntegralIndex, rtol, atol):
    # int_{x1}^{x2} x^(i-k-1) (+sqrt(2 phi))^j dx, left to right
    p = _oval_param(sys, h)
    e = idx.i - sys.k - 1
    par = _kernel_params(sys, h, p, float(e), 0.5 * idx.j, 0)
    val = _integrate(par, rtol, atol, str(idx))
    return p, _sgn_pow(p.sgn, e) * val


def integral_I(sys: SystemSpec, h: float, idx, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """I_{i,j}(h) over the upper half-oval (flow direction).

    Examples
    --------
    >>> from pfab.systems import make_system
    >>> round(integral_I(make_system("s1"), 1.0, (0, 0)), 12)
    5.656854249492
    """
    idx = idx if isinstance(idx, IntegralIndex) else IntegralIndex.of(*idx)
    p, raw = _raw_upper(sys, float(h), idx, rtol, atol)
    return p.iv.orientation * raw


def integral_J(sys: SystemSpec, h: float, idx, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """J_{i,j}(h) over the lower half-oval, where y = -sqrt(2 phi).

    The lower half is run opposite to the upper one, so in the left-to-right
    parametrisation it picks up a factor -1 and y**j picks up (-1)**j.
    """
    idx = idx if isinstance(idx, IntegralIndex) else IntegralIndex.of(*idx)
    p, raw = _raw_upper(sys, float(h), idx, rtol, atol)
    ysign = -1.0 if idx.j % 2 else 1.0
    return -p.iv.orientation * ysign * raw


def dy_integral(sys: SystemSpec, h: float, i: int, j: int, rtol: float = 1e-11, atol: float = 1e-13) -> float:
    """int_{Gamma+_h} x^i y^j dy by direct parametrisation.

    On the upper branch dy = phi'(x) dx / y, so the integrand becomes
    x^i y^(j-1) phi'(x) dx, which the substitution keeps smooth even for j = 0.
    """
    h = float(h)
    p = _oval_param(sys, h)
    e = Fraction(i)
    par = _kernel_params(sys, h, p, float(e), 0.5 * (j - 1), 1)
    val = _integrate(par, rtol, atol, f"dy-integral[{i},{j}]")
    return p.iv.orientation * _sgn_pow(p.sgn, e) * val


def melnikov_quadrature(sys: SystemSpec, pert: PerturbationPoly, h: float, rtol: float = DEFAULT_RTOL) -> float:
    """M(h) assembled from quadrature values of the I_{i,j}.

    M = sum_{i,j} rho_{i,j} I_{i,j}(h); see :func:`pfab.systems.rho_coefficients`.
    """
    h = float(h)
    _check_h(sys, h)
    total = 0.0
    for (i, j), r in rho_coefficients(sys, pert).items():
        if r:
            total += float(r) * integral_I(sys, h, IntegralIndex(i, j), rtol=rtol)
    return total


def integral_table(sys: SystemSpec, hs: Iterable[float], idx) -> list[tuple[float, float]]:
    """(h, I_{i,j}(h)) pairs sorted by h."""
    return [(float(h), integral_I(sys, h, idx)) for h in sorted(float(h) for h in hs)]
