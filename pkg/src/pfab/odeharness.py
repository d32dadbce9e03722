"""Direct simulation of the perturbed switching systems.

The section is the switching line y = 0.  A full return starts at a point
where the upper field points up, follows the upper field until it comes back
to y = 0, then follows the lower field until the next crossing.  Zeros of
the displacement x_ret - x0 are limit cycles; to first order in eps they sit
at the zeros of M(h).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import DomainError, NumericalError
from .quadrature import oval_endpoints
from .systems import PerturbationPoly, SystemKind, SystemSpec, branch_of, half_energy, hamiltonian

__all__ = [
    "ReturnMapSample",
    "EPS_MAX",
    "start_point",
    "bounding_box",
    "half_return",
    "full_return",
    "return_map",
    "find_limit_cycles",
]

log = logging.getLogger(__name__)

EPS_MAX = 1e-2
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14
MAX_STEPS = 2_000_000

_KIND = {SystemKind.S1: K.KIND_S1, SystemKind.S2: K.KIND_S2, SystemKind.R19: K.KIND_R19, SystemKind.R20: K.KIND_R20}


@dataclass(frozen=True)
class ReturnMapSample:
    x0: float
    x_ret: float
    h0: float

    @property
    def displacement(self) -> float:
        return self.x_ret - self.x0


def _coef(pert: PerturbationPoly | None, side: str):
    if pert is None:
        z = np.zeros((1, 1))
        return z, z
    return pert.arrays(side)


def _vfield(sys, pert, side, eps, x, y):
    fc, gc = _coef(pert, side)
    return K.field(_KIND[sys.kind], float(eps), fc, gc, float(x), float(y))


def start_point(sys: SystemSpec, h: float) -> float:
    """The x-intercept of the oval H = h where the unperturbed flow enters y > 0."""
    g = oval_endpoints(sys, h)
    for x in (g.x1, g.x2):
        if _vfield(sys, None, "upper", 0.0, x, 0.0)[1] > 0:
            return x
    raise NumericalError(f"no upward crossing on the oval h={h}")


def bounding_box(sys: SystemSpec, x0: float) -> tuple:
    """(xlo, xhi, ybox): ten times the extent of the oval through (x0, 0)."""
    h = hamiltonian(sys, x0, 0.0)
    g = oval_endpoints(sys, h)
    xs = np.linspace(g.x1, g.x2, 201)[1:-1]
    ymax = float(np.sqrt(2.0 * np.max(np.maximum([half_energy(sys, h, x) for x in xs], 0.0))))
    if g.x1 > 0:
        xlo, xhi = g.x1 / 10.0, g.x2 * 10.0
    else:
        xlo, xhi = g.x1 * 10.0, g.x2 / 10.0
    return xlo, xhi, 10.0 * max(ymax, 1e-3 * (g.x2 - g.x1))


def _check_eps(eps):
    if not abs(eps) <= EPS_MAX:
        raise DomainError(f"|eps| must be at most {EPS_MAX:g}, got {eps!r}")


def half_return(sys: SystemSpec, pert: PerturbationPoly | None, eps: float, x0: float, side: str,
                rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, box=None) -> float:
    """x of the next crossing of y = 0 under the ``side`` field, from (x0, 0).

    The upper field must point into y > 0 at the start and the lower one into
    y < 0; otherwise the point is not a start of that half-passage.
    """
    _check_eps(eps)
    if side not in ("upper", "lower"):
        raise DomainError(f"unknown side {side!r}")
    branch_of(sys, hamiltonian(sys, x0, 0.0))
    direction = 1 if side == "upper" else -1
    v = _vfield(sys, pert, side, eps, x0, 0.0)[1]
    if not direction * v > 0:
        raise DomainError(f"the {side} field does not leave the section at x0={x0} (dy/dt={v:g})")
    fc, gc = _coef(pert, side)
    xlo, xhi, yb = box if box is not None else bounding_box(sys, x0)
    xc, _t, status, nsteps = K.half_passage(_KIND[sys.kind], float(eps), fc, gc, float(x0), direction,
                                             rtol, atol, xlo, xhi, yb, MAX_STEPS)
    if status == K.ST_BOX:
        raise NumericalError(f"trajectory from x0={x0} left the bounding box")
    if status == K.ST_STEPS:
        raise NumericalError(f"no crossing within {MAX_STEPS} steps from x0={x0}")
    if status != K.ST_OK:
        raise NumericalError(f"step size underflow from x0={x0}")
    return float(xc)


def full_return(sys: SystemSpec, pert: PerturbationPoly | None, eps: float, x0: float,
                rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> ReturnMapSample:
    """Upper then lower half-return; aborts on sliding at either switch."""
    box = bounding_box(sys, x0)
    x1 = half_return(sys, pert, eps, x0, "upper", rtol, atol, box)
    if not _vfield(sys, pert, "lower", eps, x1, 0.0)[1] < 0:
        raise NumericalError(f"sliding at x={x1}: the lower field does not continue the crossing")
    x2 = half_return(sys, pert, eps, x1, "lower", rtol, atol, box)
    if not _vfield(sys, pert, "upper", eps, x2, 0.0)[1] > 0:
        raise NumericalError(f"sliding at x={x2}: the upper field does not continue the crossing")
    return ReturnMapSample(float(x0), x2, hamiltonian(sys, x0, 0.0))


def return_map(sys, pert, eps, xs, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> list:
    return [full_return(sys, pert, eps, float(x), rtol, atol) for x in sorted(float(x) for x in xs)]


def find_limit_cycles(sys: SystemSpec, pert: PerturbationPoly | None, eps: float, x_range, samples: int = 200,
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, spacing: str = "linear") -> list:
    """Fixed points of the full return map on ``x_range`` as (x*, h*) pairs.

    The displacement is scanned at ``samples`` start points and every sign
    change is polished by Brent's method.  When no displacement clears the
    integration noise (eps = 0, or M identically zero) the map is degenerate
    and an empty list is returned.
    """
    _check_eps(eps)
    lo, hi = sorted(float(x) for x in x_range)
    if spacing == "log":
        xs = np.geomspace(lo, hi, samples) if lo > 0 else -np.geomspace(-lo, -hi, samples)[::-1]
    else:
        xs = np.linspace(lo, hi, samples)
    d = np.array([full_return(sys, pert, eps, x, rtol, atol).displacement for x in xs])
    # integration noise: the eps = 0 return map at a few of the same points
    probe = xs[:: max(1, len(xs) // 5)]
    noise = 100.0 * max(abs(full_return(sys, None, 0.0, x, rtol, atol).displacement) for x in probe)
    if np.max(np.abs(d)) <= noise:
        log.warning("return map is the identity to integration accuracy; no isolated cycles")
        return []

    def disp(x):
        return full_return(sys, pert, eps, x, rtol, atol).displacement

    out = []
    for a, b, da, db in zip(xs, xs[1:], d, d[1:]):
        if da == 0:
            out.append(a)
        elif da * db < 0:
            out.append(brentq(disp, a, b, xtol=1e-13 * max(1.0, abs(a)), rtol=1e-14))
    return [(float(x), float(hamiltonian(sys, x, 0.0))) for x in out]
