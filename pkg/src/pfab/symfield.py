"""A small exact differential field per system.

Elements are finite sums  c(h) * r^a * L^l  with c in Q(h), r a product of
square roots of rational functions (each to the power 0 or 1) and L the
system's logarithm:

    S1       S = sqrt(h^2 + h),                 L = ln|2S + 2h + 1|
    S2       u = sqrt(h), v = sqrt(1 - h),      L = ln((1 + u)/(1 - u))
    r19/r20  S = sqrt(4096 h^2 - 1),            L = ln(64h - S)

Products reduce r^2 to its rational radicand, so every element has a
unique normal form and d/dh maps the set into itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import DomainError, NumericalError
from .polyrat import Poly, PolyRat
from .systems import SystemKind, SystemSpec

__all__ = [
    "FieldElem",
    "field_const",
    "field_h",
    "generator",
    "log_gen",
    "differentiate",
    "wronskian",
    "evaluate",
    "ect_check",
    "ECTReport",
    "basis_family",
    "printed_wronskian",
    "tail_radius",
    "evaluate_stable",
    "evaluate_array",
    "evaluate_certified",
    "melnikov_family",
    "closed_form_shapes",
    "fit_constants",
]

F = Fraction
_H = PolyRat.h()


def _p(*c) -> PolyRat:
    return PolyRat(Poly([F(x) for x in c]))


@dataclass(frozen=True)
class _Gens:
    names: tuple  # radical names
    radicands: tuple  # PolyRat, r_i^2
    log_derivative: tuple  # (radical exponent tuple, PolyRat): dL = coef * r^e
    log_text: str


def _gens(kind: SystemKind) -> _Gens:
    if kind is SystemKind.S1:
        R = _p(0, 1, 1)
        return _Gens(("S",), (R,), ((1,), PolyRat.const(1) / R), "ln|2*S + 2*h + 1|")
    if kind is SystemKind.S2:
        return _Gens(("u", "v"), (_p(0, 1), _p(1, -1)),
                     ((1, 0), PolyRat.const(1) / (_p(0, 1) * _p(1, -1))), "ln((1 + u)/(1 - u))")
    R = _p(-1, 0, 4096)
    return _Gens(("S",), (R,), ((1,), PolyRat.const(-64) / R), "ln(64*h - S)")


_RAD_TEXT = {
    SystemKind.S1: {"S": "sqrt(h^2 + h)"},
    SystemKind.S2: {"u": "sqrt(h)", "v": "sqrt(1 - h)"},
    SystemKind.R19: {"S": "sqrt(4096*h^2 - 1)"},
    SystemKind.R20: {"S": "sqrt(4096*h^2 - 1)"},
}


_LOG_TEXT = {
    SystemKind.S1: "ln|2*sqrt(h^2 + h) + 2*h + 1|",
    SystemKind.S2: "ln((1 + sqrt(h))/(1 - sqrt(h)))",
    SystemKind.R19: "ln(64*h - sqrt(4096*h^2 - 1))",
    SystemKind.R20: "ln(64*h - sqrt(4096*h^2 - 1))",
}


class FieldElem:
    """Element of the differential field of one system.

    ``terms`` maps ``(radical exponents..., log power)`` to a :class:`PolyRat`.
    Instances are immutable.
    """

    __slots__ = ("kind", "terms")

    def __init__(self, kind, terms=None):
        self.kind = SystemKind.parse(kind)
        nrad = len(_gens(self.kind).names)
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(m) for m in mono)
            if len(mono) != nrad + 1:
                raise ValueError(f"monomial {mono} has wrong length for {self.kind.value}")
            if not isinstance(c, PolyRat):
                c = PolyRat.const(F(c))
            if not c.is_zero():
                clean[mono] = clean[mono] + c if mono in clean else c
        self.terms = {m: c for m, c in sorted(clean.items()) if not c.is_zero()}

    # ---- construction ---------------------------------------------------
    @property
    def nrad(self) -> int:
        return len(_gens(self.kind).names)

    def _mono(self, rads=None, l=0):
        rads = rads or (0,) * self.nrad
        return tuple(rads) + (l,)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def log_degree(self) -> int:
        return max((m[-1] for m in self.terms), default=0)

    # ---- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.kind is not self.kind:
                raise ValueError("mixing elements of different systems")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElem(self.kind, {self._mono(): PolyRat.const(other)})
        if isinstance(other, float):
            return FieldElem(self.kind, {self._mono(): PolyRat.const(F(other))})
        if isinstance(other, (PolyRat, Poly)):
            return FieldElem(self.kind, {self._mono(): PolyRat(other) if isinstance(other, Poly) else other})
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return FieldElem(self.kind, out)

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.kind, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        g = _gens(self.kind)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c = c1 * c2
                rad = []
                for t in range(self.nrad):
                    e = m1[t] + m2[t]
                    if e == 2:
                        c = c * g.radicands[t]
                        e = 0
                    rad.append(e)
                mono = tuple(rad) + (m1[-1] + m2[-1],)
                out[mono] = out[mono] + c if mono in out else c
        return FieldElem(self.kind, out)

    __rmul__ = __mul__

    def scale(self, a) -> "FieldElem":
        a = a if isinstance(a, PolyRat) else PolyRat.const(F(a))
        return FieldElem(self.kind, {m: c * a for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.kind is other.kind and self.terms == other.terms

    def __hash__(self):
        return hash((self.kind, tuple(self.terms.items())))

    # ---- text -------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        g = _gens(self.kind)
        rt = _RAD_TEXT[self.kind]
        parts = []
        for m, c in self.terms.items():
            factors = [rt[g.names[t]] for t in range(self.nrad) if m[t]]
            if m[-1] == 1:
                factors.append(_LOG_TEXT[self.kind])
            elif m[-1] > 1:
                factors.append(f"({_LOG_TEXT[self.kind]})^{m[-1]}")
            parts.append("*".join([f"({c})"] + factors) if factors else f"({c})")
        return " + ".join(parts)

    def __repr__(self):
        return f"FieldElem[{self.kind.value}]({self})"


# ---- constructors ---------------------------------------------------------
def field_const(kind, c) -> FieldElem:
    kind = SystemKind.parse(kind)
    n = len(_gens(kind).names)
    return FieldElem(kind, {(0,) * n + (0,): PolyRat.const(F(c))})


def field_h(kind, poly: Sequence = (0, 1)) -> FieldElem:
    """A polynomial in h (coefficients low to high) as a field element."""
    kind = SystemKind.parse(kind)
    n = len(_gens(kind).names)
    return FieldElem(kind, {(0,) * n + (0,): _p(*poly)})


def generator(kind, name: str) -> FieldElem:
    """The radical called ``name`` ('S', 'u' or 'v')."""
    kind = SystemKind.parse(kind)
    g = _gens(kind)
    if name not in g.names:
        raise DomainError(f"{kind.value} has no radical {name!r}")
    rad = tuple(1 if nm == name else 0 for nm in g.names)
    return FieldElem(kind, {rad + (0,): PolyRat.const(1)})


def log_gen(kind) -> FieldElem:
    kind = SystemKind.parse(kind)
    n = len(_gens(kind).names)
    return FieldElem(kind, {(0,) * n + (1,): PolyRat.const(1)})


# ---- calculus --------------------------------------------------------------
def differentiate(e: FieldElem) -> FieldElem:
    """Exact d/dh."""
    g = _gens(e.kind)
    n = e.nrad
    out = FieldElem(e.kind)
    log_rad, log_coef = g.log_derivative
    dlog = FieldElem(e.kind, {tuple(log_rad) + (0,): log_coef})
    for m, c in e.terms.items():
        # d(c) and the logarithmic derivative of the radicals r_t' / r_t = R_t' / (2 R_t)
        coef = c.deriv()
        for t in range(n):
            if m[t]:
                R = g.radicands[t]
                coef = coef + c * R.deriv() / (R * 2)
        out = out + FieldElem(e.kind, {m: coef})
        l = m[-1]
        if l:
            rest = FieldElem(e.kind, {tuple(m[:-1]) + (l - 1,): c * l})
            out = out + rest * dlog
    return out


def _det(rows: list) -> FieldElem:
    """Determinant by Laplace expansion with memoisation over column subsets."""
    m = len(rows)
    kind = rows[0][0].kind
    # val[mask] = det of the submatrix made of the first popcount(mask) rows and columns in mask
    val = {0: field_const(kind, 1)}
    for r in range(m):
        new = {}
        for mask, sub in val.items():
            if sub.is_zero():
                continue
            for c in range(m):
                if mask & (1 << c):
                    continue
                entry = rows[r][c]
                if entry.is_zero():
                    continue
                # sign: number of used columns greater than c
                above = bin(mask >> (c + 1)).count("1")
                term = sub * entry
                if above % 2:
                    term = -term
                nm = mask | (1 << c)
                new[nm] = new[nm] + term if nm in new else term
        val = new
    return val.get((1 << m) - 1, FieldElem(kind))


def wronskian(funcs: Sequence[FieldElem], m: int) -> FieldElem:
    """W[f_0, ..., f_{m-1}] = det(f_j^(i)), 0 <= i, j < m."""
    if not 1 <= m <= len(funcs):
        raise DomainError(f"need 1 <= m <= {len(funcs)}, got {m}")
    cols = []
    for f in funcs[:m]:
        ders = [f]
        for _ in range(m - 1):
            ders.append(differentiate(ders[-1]))
        cols.append(ders)
    rows = [[cols[j][i] for j in range(m)] for i in range(m)]
    return _det(rows)


# ---- evaluation ------------------------------------------------------------
def _gen_values(kind: SystemKind, h, use_mp: bool):
    """(radical values, L value) at h, computed without cancellation."""
    if use_mp:
        sqrt, log, log1p = mpmath.sqrt, mpmath.log, mpmath.log1p
        if isinstance(h, Fraction):
            h = mpmath.mpf(h.numerator) / h.denominator
        h = mpmath.mpf(h)
    else:
        sqrt, log, log1p = math.sqrt, math.log, math.log1p
        h = float(h)
    if kind is SystemKind.S1:
        if not (h > 0 or h < -1):
            raise DomainError(f"h={h} is outside the S1 field domain")
        S = sqrt(h * h + h)
        if h > 0:
            L = log(2 * S + 2 * h + 1)
        else:
            # |2S + 2h + 1| = 1/|2h + 1 - 2S|
            L = -log(-(2 * h + 1) + 2 * S)
        return (S,), L
    if kind is SystemKind.S2:
        if not 0 < h < 1:
            raise DomainError(f"h={h} is outside the S2 field domain")
        u = sqrt(h)
        v = sqrt(1 - h)
        L = log1p(2 * u / (1 - u))
        return (u, v), L
    if not 64 * h > 1:
        raise DomainError(f"h={h} is outside the {kind.value} field domain")
    S = sqrt((64 * h - 1) * (64 * h + 1))
    return (S,), -log(64 * h + S)


def evaluate(e: FieldElem, h, dps: int | None = None):
    """Value at h.  With ``dps`` the evaluation runs in mpmath at that precision
    and returns an ``mpf``; otherwise in double precision."""
    if dps is not None:
        with mpmath.workdps(dps):
            return _evaluate(e, mpmath.mpf(h), True)
    return _evaluate(e, float(h), False)


def _evaluate(e: FieldElem, h, use_mp: bool):
    rads, L = _gen_values(e.kind, h, use_mp)
    total = mpmath.mpf(0) if use_mp else 0.0
    hv = h
    for m, c in e.terms.items():
        t = c(hv)
        for k, r in enumerate(rads):
            if m[k]:
                t = t * r
        if m[-1]:
            t = t * L ** m[-1]
        total += t
    return total


def evaluate_stable(e: FieldElem, h, dps: int = 60, max_dps: int = 1600, rtol: float = 1e-8):
    """mpmath value of ``e`` at ``h`` whose leading digits are trustworthy.

    Near singular endpoints the closed forms cancel catastrophically, so the
    value is recomputed at doubled precision until two successive results
    agree to ``rtol``.  Raises :class:`NumericalError` if ``max_dps`` is hit.
    """
    def value(d):
        try:
            return evaluate(e, h, dps=d)
        except ZeroDivisionError:
            # an expanded denominator cancelled to exactly zero at this precision
            return None

    prev = value(dps)
    while dps < max_dps:
        dps *= 2
        cur = value(dps)
        if cur is not None and prev is not None and abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise NumericalError(f"evaluation at h={h} did not stabilise below {max_dps} digits")


_DOMAIN = {
    SystemKind.S1: ((-math.inf, -1.0), (0.0, math.inf)),
    SystemKind.S2: ((0.0, 1.0),),
    SystemKind.R19: ((1 / 64, math.inf),),
    SystemKind.R20: ((1 / 64, math.inf),),
}


def _gen_arrays(kind: SystemKind, h: np.ndarray):
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        if kind is SystemKind.S1:
            S = np.sqrt(h * h + h)
            L = np.where(h > 0, np.log(2 * S + 2 * h + 1), -np.log(np.abs(2 * S - (2 * h + 1))))
            return (S,), L
        if kind is SystemKind.S2:
            u = np.sqrt(h)
            return (u, np.sqrt(1 - h)), np.log1p(2 * u / (1 - u))
        S = np.sqrt((64 * h - 1) * (64 * h + 1))
        return (S,), -np.log(64 * h + S)


def _absval(p: Poly, x: np.ndarray) -> np.ndarray:
    return Poly([abs(a) for a in p.c])(np.abs(x))


def _terms_array(e: FieldElem, h: np.ndarray, with_bound: bool = False):
    """Per-term values (and, optionally, a bound on their rounding error).

    The bound uses the absolute-coefficient polynomials at |h|, which
    covers the cancellation inside Horner evaluation of num and den.
    """
    rads, L = _gen_arrays(e.kind, h)
    out = np.empty((len(e.terms), h.size))
    err = np.empty_like(out) if with_bound else None
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        for n, (m, c) in enumerate(e.terms.items()):
            num, den = c.num(h), c.den(h)
            g = np.ones_like(h)
            for k, r in enumerate(rads):
                if m[k]:
                    g = g * r
            if m[-1]:
                g = g * L ** m[-1]
            out[n] = num / den * g
            if with_bound:
                deg = max(c.num.degree, c.den.degree, 0) + 4
                rel_num = _absval(c.num, h) / np.abs(num)
                rel_den = _absval(c.den, h) / np.abs(den)
                err[n] = np.abs(out[n]) * deg * (rel_num + rel_den + 2)
    return (out, err) if with_bound else out


def evaluate_array(e: FieldElem, hs) -> np.ndarray:
    """Double-precision values on an array of h (no cancellation control)."""
    h = np.atleast_1d(np.asarray(hs, dtype=float))
    if not e.terms:
        return np.zeros(h.size)
    return _terms_array(e, h).sum(axis=0)


def evaluate_certified(e: FieldElem, hs, safety: float = 64.0) -> np.ndarray:
    """Values on an array of h whose sign can be trusted.

    Each value is computed in double precision together with the rounding
    bound safety * eps * sum|terms|.  Where the value does not clear its
    bound (or overflows) it is recomputed by :func:`evaluate_stable`.
    """
    h = np.atleast_1d(np.asarray(hs, dtype=float))
    if not e.terms:
        return np.zeros(h.size)
    T, E = _terms_array(e, h, with_bound=True)
    with np.errstate(invalid="ignore", over="ignore"):
        v = T.sum(axis=0)
        bound = safety * np.finfo(float).eps * (E.sum(axis=0) + np.abs(T).sum(axis=0))
    bad = ~np.isfinite(v) | ~np.isfinite(bound) | (np.abs(v) <= bound)
    for i in np.flatnonzero(bad):
        v[i] = float(evaluate_stable(e, float(h[i])))
    return v


# ---- families ---------------------------------------------------------------
def basis_family(sys: SystemSpec) -> list:
    """The n = 2 families as printed (S1: six, S2: seven functions).

    For r19/r20 the closed-form basis shapes {h - 1/64, sqrt(4096h^2-1), h L}
    are returned instead.
    """
    kind = sys.kind
    hh = field_h(kind)
    L = log_gen(kind)
    if kind is SystemKind.S1:
        S = generator(kind, "S")
        half = F(1, 2)
        return [
            hh,
            S,
            field_h(kind, (0, 1, 1)),
            L,
            L.scale(half) - S * field_h(kind, (1, 2)),
            (L * field_h(kind, (1, 2))).scale(half) - S,
        ]
    if kind is SystemKind.S2:
        u = generator(kind, "u")
        v = generator(kind, "v")
        one_minus_h = field_h(kind, (1, -1))
        f5 = u - (one_minus_h * L).scale(F(1, 2))
        return [
            u,
            hh,
            hh * u,
            field_const(kind, 1) - v,
            field_h(kind, (-1, 2)) + one_minus_h * v,
            f5,
            f5.scale(PolyRat.const(1) / _p(1, -1)),
        ]
    S = generator(kind, "S")
    return [field_h(kind, (F(-1, 64), 1)), S, hh * L]


def melnikov_family(sys: SystemSpec, branch: str | None = None) -> list:
    """The n = 2 family that M(h) is actually spanned by on one annulus.

    S1 positive branch: the printed family.  On h < -1 the integral I_{1,1}
    is proportional to h + 1 instead of h, so f0 is replaced accordingly.
    S2: the first six printed functions followed by L itself (the function
    that the printed seventh member should have been).
    """
    kind = sys.kind
    fam = basis_family(sys)
    if kind is SystemKind.S1:
        if branch == "neg":
            return [field_h(kind, (1, 1))] + fam[1:]
        return fam
    if kind is SystemKind.S2:
        return fam[:6] + [log_gen(kind)]
    raise DomainError("the n = 2 families exist only for S1 and S2")


def closed_form_shapes(sys: SystemSpec, branch: str | None = None) -> dict:
    """Basis integral -> closed form up to a multiplicative constant.

    Keys are the basis names of :data:`pfab.reduction.BASIS`.
    """
    kind = sys.kind
    hh = field_h(kind)
    L = log_gen(kind)
    if kind is SystemKind.S1:
        S = generator(kind, "S")
        return {
            "I[0,0]": S,
            "I[1,1]": field_h(kind, (1, 1)) if branch == "neg" else hh,
            "I[-1,1]": field_h(kind, (0, 1, 1)),
            "I[0,2]": (L * field_h(kind, (1, 2))).scale(F(1, 2)) - S,
        }
    if kind is SystemKind.S2:
        u = generator(kind, "u")
        v = generator(kind, "v")
        return {
            "I[0,1]": hh,
            "I[1,0]": u,
            "I[1,1]": field_const(kind, 1) - v,
            "I[0,2]": u - (field_h(kind, (1, -1)) * L).scale(F(1, 2)),
        }
    lin = field_h(kind, (F(-1, 64), 1))
    S = generator(kind, "S")
    if kind is SystemKind.R19:
        return {"I[1/2,1]": lin, "I[1,1]": lin, "I[1,0]": S}
    return {"I[0,1]": lin, "I[1/2,1]": lin, "I[0,0]": S}


def fit_constants(sys: SystemSpec, h_ref: float) -> dict:
    """Constants c with I(h) = c * shape(h), fitted by quadrature at ``h_ref``.

    Constants are per annulus: they are fitted on the branch containing
    ``h_ref`` and only valid there.
    """
    from .quadrature import IntegralIndex, integral_I
    from .systems import branch_of

    branch = branch_of(sys, h_ref).branch
    out = {}
    for name, shape in closed_form_shapes(sys, branch).items():
        i, j = name[2:-1].split(",")
        val = integral_I(sys, h_ref, IntegralIndex.of(i, int(j)))
        out[name] = val / float(evaluate_stable(shape, h_ref))
    return out


# ---- printed Wronskians ---------------------------------------------------
def printed_wronskian(kind, m: int, h: float) -> float:
    """The closed-form Wronskians as printed for the n = 2 families.

    The radicals written as k-th roots are read as half-integer powers:
    (h^2+h)^(11/2) for S1 W5 and (1-h)^(5/2), (1-h)^(11/2), (1-h)^(33/2) in the
    S2 list.
    """
    kind = SystemKind.parse(kind)
    with mpmath.workdps(50):
        return _printed_wronskian(kind, m, mpmath.mpf(h))


def _printed_wronskian(kind, m, h):
    mp = mpmath
    if kind is SystemKind.S1:
        R = h * h + h
        S = mp.sqrt(R)
        L = mp.log(abs(2 * S + 2 * h + 1))
        table = {
            1: lambda: h,
            2: lambda: -h / (2 * S),
            3: lambda: -h * (4 * h + 3) / (4 * (1 + h) * S),
            4: lambda: -(8 * h ** 3 + 15 * h ** 2 + 6 * h - 3 * (2 * h + 1) * S * L) / (4 * R ** 3),
            5: lambda: 3 * (4 * h ** 3 - 2 * h ** 2 - 6 * h + 3 * S * L) / (16 * R ** mp.mpf(5.5)),
            6: lambda: -3 * (8 * h ** 4 - 8 * h ** 3 - 46 * h ** 2 - 30 * h + 3 * (6 * h + 5) * S * L)
            / (16 * R ** 8),
        }
    elif kind is SystemKind.S2:
        w = 1 - h
        u = mp.sqrt(h)
        L = mp.log((1 + u) / (1 - u))
        table = {
            1: lambda: u,
            2: lambda: u / 2,
            3: lambda: mp.mpf(1) / 4,
            4: lambda: 3 * (4 * h ** 2 - 5 * h + 2 - 2 * w ** mp.mpf(2.5)) / (32 * h ** 3 * w ** mp.mpf(2.5)),
            5: lambda: 9 * (5 * h ** 4 - 37 * h ** 3 + 71 * h ** 2 - 51 * h + 12
                            + (15 * h ** 3 - 50 * h ** 2 + 45 * h - 12) * mp.sqrt(w))
            / (512 * h ** 5 * w ** mp.mpf(5.5)),
            6: lambda: 9 * (360 * h ** 4 - 980 * h ** 3 + 930 * h ** 2 - 330 * h + 24
                            + 2 * (280 * h ** 3 - 375 * h ** 2 + 147 * h - 12) * w ** mp.mpf(1.5)
                            - 45 * (4 * h - 3) * w ** 2 * h ** mp.mpf(1.5) * L)
            / (8192 * h ** mp.mpf(7.5) * w ** 9),
            7: lambda: 27 * (
                16 * (26950 * h ** 8 - 26215 * h ** 7 + 17625 * h ** 6 - 49857 * h ** 5 + 58944 * h ** 4
                      - 31497 * h ** 3 + 9165 * h ** 2 - 1335 * h + 60) * w ** 2
                + 2 * (137445 * h ** 9 - 290980 * h ** 8 + 217735 * h ** 7 - 315480 * h ** 6
                       + 620745 * h ** 5 - 584886 * h ** 4 + 285531 * h ** 3 - 80070 * h ** 2
                       + 11400 * h - 480) * mp.sqrt(w)
                - 15 * h ** mp.mpf(1.5) * w ** mp.mpf(2.5) * (9163 * h ** 6 - 4127 * h ** 5 + 5848 * h ** 4
                                                              - 16224 * h ** 3 + 11895 * h ** 2
                                                              - 4305 * h + 630) * L)
            / (262144 * h ** 13 * w ** mp.mpf(16.5)),
        }
    else:
        raise DomainError("printed Wronskians exist for S1 and S2 only")
    if m not in table:
        raise DomainError(f"no printed W_{m} for {kind.value}")
    return float(table[m]())


# ---- ECT evidence -------------------------------------------------------------
@dataclass(frozen=True)
class ECTReport:
    """Numerical evidence (not a proof) that all W_k keep one sign."""

    is_ect_evidence: bool
    min_abs_per_k: tuple
    sign_changes_per_k: tuple
    inconclusive_per_k: tuple
    interval: tuple
    samples: int


def _sample_grid(lo: float, hi: float, samples: int) -> np.ndarray:
    """Uniform points in (lo, hi) plus geometric clusters toward both ends."""
    span = hi - lo
    g = np.geomspace(0.25, 1e-12, max(samples // 4, 2))
    pts = np.concatenate([lo + span * g, np.linspace(lo, hi, samples)[1:-1], hi - span * g])
    pts = pts[(pts > lo) & (pts < hi)]
    return np.unique(pts)


def ect_check(funcs: Sequence[FieldElem], interval, samples: int = 400, threshold: float = 1e-9,
              dps: int = 60) -> ECTReport:
    """Scan each Wronskian W_1..W_n for sign changes or near-zeros on ``interval``.

    The interval must lie inside the domain of the field; unbounded ends must
    be truncated by the caller (see :func:`tail_radius`).  Values are computed
    in mpmath starting at ``dps`` digits and refined until stable (see
    :func:`evaluate_stable`), so the cancellation of the closed forms near
    singular endpoints does not masquerade as a zero.  A sample whose modulus
    falls below ``threshold`` times the neighbours on both sides is
    reported as inconclusive.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("ect_check needs a finite interval (truncate unbounded ones first)")
    pts = _sample_grid(lo, hi, samples)
    mins, changes, inconc = [], [], []
    ok = True
    for k in range(1, len(funcs) + 1):
        W = wronskian(funcs, k)
        vals = [evaluate_stable(W, float(x), dps=dps) for x in pts]
        mags = [abs(v) for v in vals]
        signs = [int(mpmath.sign(v)) for v in vals]
        nchange = sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)
        # a dip far below its neighbours is where a zero would hide between samples
        ninc = 0
        for idx, m in enumerate(mags):
            left, right = mags[max(0, idx - 2): idx], mags[idx + 1: idx + 3]
            # only a two-sided dip counts; steep monotone growth toward an end does not
            if m == 0 or (left and right and m < threshold * min(max(left), max(right))):
                ninc += 1
        mins.append(float(min(mags)))
        changes.append(nchange)
        inconc.append(ninc)
        ok &= nchange == 0 and ninc == 0
    return ECTReport(ok, tuple(mins), tuple(changes), tuple(inconc), (lo, hi), len(pts))


def tail_radius(e: FieldElem, start: float, direction: int = +1, safety: float = 10.0,
                max_log2: int = 64) -> float:
    """Truncation point for an interval unbounded in ``direction`` from ``start``.

    The element is sampled at start + direction*d for offsets d = 2**(p/4),
    p = 0..4*max_log2.  Beyond the last sign change the dominant term of the
    element has taken over; the returned end point sits ``safety`` times that
    offset away from ``start`` (offset 1 when the sign never changes).
    """
    s = float(start)
    d = 2.0 ** (np.arange(0, 4 * max_log2 + 1) / 4)
    x = s + direction * d
    ok = np.ones(x.size, dtype=bool)
    lo_hi = _DOMAIN[e.kind]
    ok &= np.array([any(a < t < b for a, b in lo_hi) for t in x])
    vals = evaluate_certified(e, x[ok]) if ok.any() else np.array([])
    sg = np.sign(vals)
    dd = d[ok]
    last = 1.0
    nz = np.flatnonzero(sg)
    for a, b in zip(nz, nz[1:]):
        if sg[a] != sg[b]:
            last = dd[b]
    return s + direction * safety * last
