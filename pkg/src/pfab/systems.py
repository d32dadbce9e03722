"""The four quadratic centres, their first integrals and perturbed fields.

Each system has the first integral

    H(x, y) = x**(-k) * (y**2/2 + lambda2*x**2 + lambda1*x + lambda0)

and is perturbed by polynomials (f+, g+) above y = 0 and (f-, g-) below.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError

__all__ = [
    "SystemKind",
    "SigmaInterval",
    "Center",
    "SystemSpec",
    "PerturbationPoly",
    "make_system",
    "hamiltonian",
    "half_energy",
    "vector_field",
    "branch_of",
    "rho_coefficients",
]

_SQ2 = math.sqrt(2.0)


class SystemKind(str, enum.Enum):
    S1 = "s1"
    S2 = "s2"
    R19 = "r19"
    R20 = "r20"

    @classmethod
    def parse(cls, s) -> "SystemKind":
        if isinstance(s, cls):
            return s
        try:
            return cls(str(s).strip().lower())
        except ValueError:
            raise DomainError(f"unknown system {s!r}; expected one of s1, s2, r19, r20") from None


@dataclass(frozen=True)
class SigmaInterval:
    """Open h-interval carrying one period annulus.

    ``orientation`` is +1 when the upper half of the oval is run from the
    left x-intercept to the right one by the unperturbed flow, -1 otherwise.
    """

    lo: float
    hi: float
    branch: str
    orientation: int
    center_h: float

    def contains(self, h: float) -> bool:
        return self.lo < h < self.hi

    def distance_to_boundary(self, h: float) -> float:
        return min(h - self.lo, self.hi - h)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


@dataclass(frozen=True)
class Center:
    x: Fraction
    y: Fraction
    h: Fraction


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind
    k: Fraction
    lambda0: Fraction
    lambda1: Fraction
    lambda2: Fraction
    sigma: tuple
    centers: tuple
    mu_exponent: Fraction
    mu_scale: float

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def k_is_integer(self) -> bool:
        return self.k.denominator == 1

    def floats(self):
        """(k, lambda2, lambda1, lambda0) as floats."""
        return float(self.k), float(self.lambda2), float(self.lambda1), float(self.lambda0)


def _F(x) -> Fraction:
    return Fraction(x)


_INF = math.inf


def make_system(kind) -> SystemSpec:
    """Exact data for one of the four systems.

    Examples
    --------
    >>> make_system("r19").k
    Fraction(3, 2)
    """
    kind = SystemKind.parse(kind)
    if kind is SystemKind.S1:
        return SystemSpec(
            kind, _F(1), _F("1/4"), _F("-1/2"), _F("1/4"),
            sigma=(
                SigmaInterval(-_INF, -1.0, "neg", -1, -1.0),
                SigmaInterval(0.0, _INF, "pos", +1, 0.0),
            ),
            centers=(Center(_F(1), _F(0), _F(0)), Center(_F(-1), _F(0), _F(-1))),
            mu_exponent=_F(-2), mu_scale=_SQ2 / 2,
        )
    if kind is SystemKind.S2:
        return SystemSpec(
            kind, _F(2), _F(1), _F(-2), _F(1),
            sigma=(SigmaInterval(0.0, 1.0, "main", +1, 0.0),),
            centers=(Center(_F(1), _F(0), _F(0)),),
            mu_exponent=_F(-3), mu_scale=_SQ2,
        )
    if kind is SystemKind.R19:
        return SystemSpec(
            kind, _F("3/2"), _F(0), _F("1/128"), _F("1/128"),
            sigma=(SigmaInterval(1 / 64, _INF, "main", -1, 1 / 64),),
            centers=(Center(_F(1), _F(0), _F("1/64")),),
            mu_exponent=_F("-5/2"), mu_scale=-1.0,
        )
    return SystemSpec(
        kind, _F("1/2"), _F("1/128"), _F("1/128"), _F(0),
        sigma=(SigmaInterval(1 / 64, _INF, "main", -1, 1 / 64),),
        centers=(Center(_F(1), _F(0), _F("1/64")),),
        mu_exponent=_F("-3/2"), mu_scale=-1.0,
    )


def branch_of(sys: SystemSpec, h: float) -> SigmaInterval:
    """The Sigma-interval containing ``h``; DomainError if there is none."""
    h = float(h)
    for iv in sys.sigma:
        if iv.contains(h):
            return iv
    raise DomainError(f"h={h!r} is outside the energy range of {sys.name}")


def _xpow(sys: SystemSpec, x: float, p: Fraction):
    # x**p restricted to the real domain the systems live on
    if x == 0:
        raise DomainError("x = 0 is not in the domain of the first integral")
    if x < 0:
        if p.denominator != 1:
            raise DomainError(f"x < 0 with non-integer exponent {p} in {sys.name}")
        return float(x) ** int(p)
    return float(x) ** float(p)


def hamiltonian(sys: SystemSpec, x: float, y: float) -> float:
    """H(x, y) = x^(-k) (y^2/2 + lambda2 x^2 + lambda1 x + lambda0)."""
    k, l2, l1, l0 = sys.floats()
    return _xpow(sys, x, -sys.k) * (0.5 * y * y + l2 * x * x + l1 * x + l0)


def half_energy(sys: SystemSpec, h: float, x: float) -> float:
    """phi(x) = h x^k - lambda2 x^2 - lambda1 x - lambda0, equal to y^2/2 on the level h."""
    k, l2, l1, l0 = sys.floats()
    return h * _xpow(sys, x, sys.k) - l2 * x * x - l1 * x - l0


def unperturbed_field(sys: SystemSpec, x: float, y: float):
    kind = sys.kind
    if kind is SystemKind.S1:
        return _SQ2 * x * y, 0.25 * _SQ2 * (1.0 - x * x + 2.0 * y * y)
    if kind is SystemKind.S2:
        return 0.5 * _SQ2 * x * y, 0.5 * _SQ2 * (2.0 - 2.0 * x + y * y)
    if kind is SystemKind.R19:
        return -x * y, -0.75 * y * y + x * x / 256.0 - x / 256.0
    return -x * y, -0.25 * y * y + x / 256.0 - 1.0 / 256.0


def vector_field(sys: SystemSpec, side: str, eps: float, pert: "PerturbationPoly", x: float, y: float):
    """Unperturbed field plus eps*(f, g) of the requested side ('upper'/'lower')."""
    if side not in ("upper", "lower"):
        raise DomainError(f"unknown side {side!r}; expected 'upper' or 'lower'")
    u, v = unperturbed_field(sys, x, y)
    if eps and pert is not None:
        a, b = (pert.a_plus, pert.b_plus) if side == "upper" else (pert.a_minus, pert.b_minus)
        u += eps * sum(c * x ** i * y ** j for (i, j), c in a.items())
        v += eps * sum(c * x ** i * y ** j for (i, j), c in b.items())
    return u, v


# --------------------------------------------------------------------------
# Perturbations
# --------------------------------------------------------------------------
_COEF_KEYS = ("a+", "a-", "b+", "b-")


def _freeze(d: Mapping | None, n: int, label: str):
    out = {}
    for key, val in (d or {}).items():
        if isinstance(key, str):
            i, j = (int(t) for t in key.split(","))
        else:
            i, j = (int(t) for t in key)
        if i < 0 or j < 0 or i + j > n:
            raise DomainError(f"{label}[{i},{j}] violates 0 <= i, j and i + j <= n = {n}")
        val = float(val)
        if val != 0.0:
            out[(i, j)] = val
    return MappingProxyType(dict(sorted(out.items())))


@dataclass(frozen=True)
class PerturbationPoly:
    """Discontinuous polynomial perturbation of degree ``n``.

    ``a_plus[(i, j)]`` is the coefficient of x^i y^j in f+ (the x-component
    above the switching line); ``b_*`` are the y-components.  Zero entries are
    dropped.
    """

    n: int
    a_plus: Mapping = field(default_factory=dict)
    a_minus: Mapping = field(default_factory=dict)
    b_plus: Mapping = field(default_factory=dict)
    b_minus: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"perturbation degree must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("a_plus", "a_minus", "b_plus", "b_minus"):
            object.__setattr__(self, name, _freeze(getattr(self, name), self.n, name))

    @classmethod
    def zero(cls, n: int = 0) -> "PerturbationPoly":
        return cls(n)

    def is_smooth(self) -> bool:
        return dict(self.a_plus) == dict(self.a_minus) and dict(self.b_plus) == dict(self.b_minus)

    def is_zero(self) -> bool:
        return not (self.a_plus or self.a_minus or self.b_plus or self.b_minus)

    def coef(self, which: str, i: int, j: int) -> float:
        m = {"a+": self.a_plus, "a-": self.a_minus, "b+": self.b_plus, "b-": self.b_minus}[which]
        return m.get((i, j), 0.0)

    def arrays(self, side: str):
        """Dense (n+1, n+1) arrays (F, G) of the side's coefficients."""
        a, b = (self.a_plus, self.b_plus) if side == "upper" else (self.a_minus, self.b_minus)
        F = np.zeros((self.n + 1, self.n + 1))
        G = np.zeros((self.n + 1, self.n + 1))
        for (i, j), c in a.items():
            F[i, j] = c
        for (i, j), c in b.items():
            G[i, j] = c
        return F, G

    def to_json_dict(self) -> dict:
        def enc(m):
            return {f"{i},{j}": float(c) for (i, j), c in m.items()}

        return {"n": self.n, "a+": enc(self.a_plus), "a-": enc(self.a_minus),
                "b+": enc(self.b_plus), "b-": enc(self.b_minus)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_json_dict(cls, d: dict) -> "PerturbationPoly":
        if "n" not in d:
            raise DomainError("perturbation JSON needs an integer field 'n'")
        unknown = set(d) - {"n", *_COEF_KEYS}
        if unknown:
            raise DomainError(f"unknown perturbation keys: {sorted(unknown)}")
        return cls(int(d["n"]), d.get("a+"), d.get("a-"), d.get("b+"), d.get("b-"))

    @classmethod
    def from_json(cls, text: str) -> "PerturbationPoly":
        return cls.from_json_dict(json.loads(text))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, smooth: bool = False, scale: float = 1.0):
        """Standard-normal coefficients for every admissible index."""
        idx = [(i, d - i) for d in range(n + 1) for i in range(d + 1)]
        ap = {ij: scale * rng.standard_normal() for ij in idx}
        bp = {ij: scale * rng.standard_normal() for ij in idx}
        if smooth:
            return cls(n, ap, ap, bp, bp)
        am = {ij: scale * rng.standard_normal() for ij in idx}
        bm = {ij: scale * rng.standard_normal() for ij in idx}
        return cls(n, ap, am, bp, bm)


def rho_coefficients(sys: SystemSpec, pert: PerturbationPoly, exact: bool = False) -> dict:
    """Coefficients rho_{i,j} with M(h) = sum rho_{i,j} I_{i,j}(h).

    The dy-part of the one-form is moved onto dx by
    int x^m y^j dy = -m/(j+1) int x^(m-1) y^(j+1) dx, and every lower-branch
    integral is folded onto the upper one by J_{i,j} = (-1)^(j+1) I_{i,j}.
    Keys are ``(Fraction i, int j)``; with ``exact=True`` the values are the
    exact rationals of the (binary) float coefficients.
    """
    conv = Fraction if exact else float
    k = sys.k
    out: dict = {}

    def add(key, val):
        if val:
            out[key] = out.get(key, 0) + val

    for (i, j) in set(pert.b_plus) | set(pert.b_minus):
        bp = conv(pert.b_plus.get((i, j), 0.0))
        bm = conv(pert.b_minus.get((i, j), 0.0))
        add((Fraction(i), j), bp + (-1) ** (j + 1) * bm)
    for (i, j) in set(pert.a_plus) | set(pert.a_minus):
        ap = conv(pert.a_plus.get((i, j), 0.0))
        am = conv(pert.a_minus.get((i, j), 0.0))
        fac = (Fraction(i) - k - 1) / (j + 1)
        fac = fac if exact else float(fac)
        add((Fraction(i - 1), j + 1), fac * (ap + (-1) ** j * am))
    return {key: out[key] for key in sorted(out) if out[key] != 0}
