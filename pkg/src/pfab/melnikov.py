"""Closed-form Melnikov functions, zero counting and realisation of sharp counts.

M(h) is built exactly: the perturbation is pushed through the reduction to
the basis integrals, whose closed forms (up to constants fitted once by
quadrature) live in :mod:`pfab.symfield`.  For n = 2 the result is further
projected onto the six (S1) or seven (S2) functions of the ECT family,
giving the coordinate vector :class:`KVector`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, NumericalError
from .polyrat import Poly, PolyRat, poly_gcd
from .reduction import reduce_melnikov
from .symfield import (
    FieldElem,
    closed_form_shapes,
    evaluate_certified,
    evaluate_stable,
    field_const,
    fit_constants,
    log_gen,
    melnikov_family,
    tail_radius,
)
from .systems import PerturbationPoly, SigmaInterval, SystemKind, SystemSpec, branch_of

__all__ = [
    "KVector",
    "ZeroReport",
    "basis_constants",
    "melnikov_field",
    "k_map",
    "k_formulas",
    "printed_k_map",
    "melnikov_closed",
    "k_jacobian",
    "printed_jacobian",
    "REMARK_COORDS",
    "bound_for",
    "count_zeros",
    "scan_interval",
    "melnikov_zero_reports",
    "realize_max",
    "bound_audit",
]

F = Fraction

# reference levels at which the basis constants are fitted
_REF_H = {
    (SystemKind.S1, "pos"): 1.0,
    (SystemKind.S1, "neg"): -2.0,
    (SystemKind.S2, "main"): 0.5,
    (SystemKind.R19, "main"): 1 / 32,
    (SystemKind.R20, "main"): 1 / 32,
}

# which basis integral defines c1 and c2, and which of them scales the others
_OWNER = {
    SystemKind.S1: {"I[0,0]": "c1", "I[0,2]": "c1", "I[1,1]": "c2", "I[-1,1]": "c2"},
    SystemKind.S2: {"I[0,1]": "c1", "I[1,1]": "c1", "I[1,0]": "c2", "I[0,2]": "c2"},
}
_DEFINING = {
    SystemKind.S1: {"c1": "I[0,0]", "c2": "I[-1,1]"},
    SystemKind.S2: {"c1": "I[0,1]", "c2": "I[1,0]"},
}

# coordinates on which the n = 2 k-map is inverted
REMARK_COORDS = {
    SystemKind.S1: (("a+", 1, 0), ("b+", 0, 0), ("a+", 0, 0), ("b+", 1, 0), ("a+", 0, 1), ("b+", 0, 2)),
    SystemKind.S2: (("b+", 0, 0), ("b+", 0, 1), ("a+", 0, 1), ("b+", 1, 1), ("a+", 0, 2), ("b+", 0, 2),
                    ("b+", 2, 0)),
}
# smooth (a+ = a-, b+ = b-) variants: the coordinates that survive and the
# family members they reach
_SMOOTH_COORDS = {
    SystemKind.S1: (("a", 1, 0), ("a", 0, 0)),
    SystemKind.S2: (("b", 0, 1), ("b", 1, 1), ("a", 0, 2)),
}
_SMOOTH_MEMBERS = {SystemKind.S1: (0, 2), SystemKind.S2: (1, 3, 4)}


def _key_name(key) -> str:
    i, j = key
    return f"I[{i},{j}]"


def _branch(sys: SystemSpec, branch: str | None) -> str:
    names = [iv.branch for iv in sys.sigma]
    if branch is None:
        if len(names) != 1:
            raise DomainError(f"{sys.name} has several annuli; pass branch= one of {names}")
        return names[0]
    if branch not in names:
        raise DomainError(f"unknown branch {branch!r} for {sys.name}")
    return branch


def _interval(sys: SystemSpec, branch: str) -> SigmaInterval:
    return next(iv for iv in sys.sigma if iv.branch == branch)


@lru_cache(maxsize=None)
def _constants(kind: SystemKind, branch: str) -> tuple:
    from .systems import make_system

    return tuple(sorted(fit_constants(make_system(kind), _REF_H[(kind, branch)]).items()))


def basis_constants(sys: SystemSpec, branch: str | None = None) -> dict:
    """Fitted constant of every basis integral on one annulus (cached)."""
    return dict(_constants(sys.kind, _branch(sys, branch)))


# --------------------------------------------------------------------------
# exact M(h)
# --------------------------------------------------------------------------
def melnikov_field(sys: SystemSpec, pert: PerturbationPoly, branch: str | None = None) -> FieldElem:
    """M(h) on one annulus as a field element.

    The fitted constants enter as their exact binary-rational values, so
    the element can be evaluated to any precision.
    """
    branch = _branch(sys, branch)
    combo = reduce_melnikov(sys, pert)
    shapes = closed_form_shapes(sys, branch)
    consts = basis_constants(sys, branch)
    total = field_const(sys.kind, 0)
    for key, coef in combo.coeffs.items():
        name = _key_name(key)
        c = F(consts[name])
        total = total + shapes[name] * (coef * PolyRat.const(c))
    if not combo.log_coefficient.is_zero():
        total = total + log_gen(sys.kind) * combo.log_coefficient
    return total


# --------------------------------------------------------------------------
# projection onto the n = 2 family
# --------------------------------------------------------------------------
def _lcm(a: Poly, b: Poly) -> Poly:
    return (a * b).divmod(poly_gcd(a, b))[0].monic()


def _solve_rational(rows: list, rhs: list, n: int) -> list:
    """Exact solution of an overdetermined but consistent system over Q."""
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((k for k in range(r, len(M)) if M[k][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for k in range(len(M)):
            if k != r and M[k][c] != 0:
                f = M[k][c]
                M[k] = [x - f * y for x, y in zip(M[k], M[r])]
        piv_cols.append(c)
        r += 1
    if len(piv_cols) < n:
        raise NumericalError("family is linearly dependent")
    if any(row[-1] != 0 for row in M[r:]):
        raise NumericalError("element is not in the span of the family")
    return [M[i][-1] for i in range(n)]


def _project(e: FieldElem, family: Sequence[FieldElem]) -> list:
    monos = set(e.terms)
    for f in family:
        monos |= set(f.terms)
    den = Poly.const(1)
    for g in list(family) + [e]:
        for c in g.terms.values():
            den = _lcm(den, c.den)
    rows, rhs = [], []
    zero = PolyRat.zero()
    for m in sorted(monos):
        cols = [(f.terms.get(m, zero) * PolyRat(den)).num for f in family]
        target = (e.terms.get(m, zero) * PolyRat(den)).num
        deg = max([p.degree for p in cols] + [target.degree, 0])
        for p in range(deg + 1):
            rows.append([q.c[p] if p < len(q.c) else F(0) for q in cols])
            rhs.append(target.c[p] if p < len(target.c) else F(0))
    return _solve_rational(rows, rhs, len(family))


def _coords(n: int = 2):
    for which in ("a+", "a-", "b+", "b-"):
        for d in range(n + 1):
            for i in range(d + 1):
                yield which, i, d - i


def _unit(coord, n: int = 2) -> PerturbationPoly:
    which, i, j = coord
    name = {"a+": "a_plus", "a-": "a_minus", "b+": "b_plus", "b-": "b_minus"}[which]
    return PerturbationPoly(n, **{name: {(i, j): 1.0}})


@lru_cache(maxsize=None)
def _table(kind: SystemKind, branch: str) -> dict:
    """coord -> {owner constant: tuple of exact k-components}."""
    from .systems import make_system

    sys = make_system(kind)
    fam = melnikov_family(sys, branch)
    shapes = closed_form_shapes(sys, branch)
    consts = dict(_constants(kind, branch))
    ratio = {}
    for name, owner in _OWNER[kind].items():
        r = consts[name] / consts[_DEFINING[kind][owner]]
        q = F(r).limit_denominator(64)
        if abs(float(q) - r) > 1e-10 * abs(r):
            raise NumericalError(f"constant ratio {name}/{owner} = {r} is not a small rational")
        ratio[name] = q
    out = {}
    for coord in _coords():
        # c1/c2 is irrational, so each constant's share must lie in the span
        # on its own
        parts = {"c1": field_const(kind, 0), "c2": field_const(kind, 0)}
        combo = reduce_melnikov(sys, _unit(coord))
        for key, coef in combo.coeffs.items():
            name = _key_name(key)
            owner = _OWNER[kind][name]
            parts[owner] = parts[owner] + shapes[name] * (coef * PolyRat.const(ratio[name]))
        out[coord] = {o: tuple(_project(e, fam)) for o, e in parts.items()}
    return out


def _n2_check(sys: SystemSpec, pert: PerturbationPoly | None = None):
    if sys.kind not in (SystemKind.S1, SystemKind.S2):
        raise DomainError("the k-map exists for S1 and S2 only")
    if pert is not None and pert.n > 2:
        raise DomainError(f"the k-map needs a perturbation of degree <= 2, got n={pert.n}")


def k_formulas(sys: SystemSpec, branch: str | None = None) -> list:
    """Exact k_i as {(owner constant, coordinate): rational coefficient}.

    For example on the S1 positive branch ``k_formulas(...)[3]`` is
    ``{("c1", ("b+", 1, 0)): 1/2, ("c1", ("b-", 1, 0)): -1/2}``.
    """
    _n2_check(sys)
    branch = _branch(sys, branch)
    tab = _table(sys.kind, branch)
    size = len(next(iter(tab.values()))["c1"])
    out = [dict() for _ in range(size)]
    for coord, per in tab.items():
        for owner, vec in per.items():
            for i, v in enumerate(vec):
                if v:
                    out[i][(owner, coord)] = v
    return out


@dataclass(frozen=True)
class KVector:
    """Coordinates of M(h) in the n = 2 family of one annulus."""

    kind: SystemKind
    branch: str
    values: tuple
    c1: float
    c2: float

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def is_zero(self) -> bool:
        return not any(self.values)


def _owner_values(sys, branch):
    consts = basis_constants(sys, branch)
    d = _DEFINING[sys.kind]
    return consts[d["c1"]], consts[d["c2"]]


def k_map(sys: SystemSpec, pert: PerturbationPoly, branch: str | None = None) -> KVector:
    """k-vector of an n <= 2 perturbation (derived table, fitted constants).

    Examples
    --------
    >>> from pfab.systems import make_system, PerturbationPoly
    >>> kv = k_map(make_system("s1"), PerturbationPoly(2, b_plus={(1, 0): 1.0}), "pos")
    >>> [round(x, 12) for x in kv.values]
    [0.0, 0.0, 0.0, 2.0, 0.0, 0.0]
    """
    _n2_check(sys, pert)
    branch = _branch(sys, branch)
    c1, c2 = _owner_values(sys, branch)
    tab = _table(sys.kind, branch)
    size = len(next(iter(tab.values()))["c1"])
    k = np.zeros(size)
    for coord in _coords():
        v = pert.coef(*coord)
        if v:
            per = tab[coord]
            k += v * (c1 * np.array([float(x) for x in per["c1"]]) + c2 * np.array([float(x) for x in per["c2"]]))
    return KVector(sys.kind, branch, tuple(float(x) for x in k), c1, c2)


def printed_k_map(sys: SystemSpec, pert: PerturbationPoly, branch: str | None = None) -> KVector:
    """The coefficient formulas exactly as printed in the source, for comparison.

    They disagree with :func:`k_map` (sign slips in the S1 a00/a10/a02
    terms; S2 per-integral constants); see the project notes.
    """
    _n2_check(sys, pert)
    branch = _branch(sys, branch)
    c1, c2 = _owner_values(sys, branch)
    a = lambda s, i, j: pert.coef("a" + s, i, j)  # noqa: E731
    b = lambda s, i, j: pert.coef("b" + s, i, j)  # noqa: E731
    ap = lambda i, j: a("+", i, j) + a("-", i, j)  # noqa: E731
    am = lambda i, j: a("+", i, j) - a("-", i, j)  # noqa: E731
    bp = lambda i, j: b("+", i, j) + b("-", i, j)  # noqa: E731
    bm = lambda i, j: b("+", i, j) - b("-", i, j)  # noqa: E731
    if sys.kind is SystemKind.S1:
        k = (
            c2 * (ap(1, 0) - ap(0, 2) + bp(1, 1) + bp(0, 1)),
            c1 * (bm(0, 0) + bm(2, 0)),
            c2 * (2 * ap(0, 0) + ap(0, 2)),
            c1 / 2 * bm(1, 0),
            c1 / 2 * am(0, 1),
            c1 * (bm(0, 2) - am(1, 1) / 2),
        )
    else:
        k = (
            c2 * (bm(0, 0) + bm(1, 0)),
            c1 * (bp(0, 1) + 2 * ap(1, 0) + 3 * ap(0, 0)),
            -2 * c2 * am(0, 1),
            c1 * (bp(1, 1) - ap(2, 0)),
            2 * c1 * ap(0, 2),
            c2 * (bm(0, 2) - am(1, 1)),
            c2 / 2 * bm(2, 0),
        )
    return KVector(sys.kind, branch, tuple(float(x) for x in k), c1, c2)


def melnikov_closed(sys: SystemSpec, kv: KVector) -> FieldElem:
    """sum k_i f_i as a field element (coefficients are the exact binary
    values of the floats)."""
    fam = melnikov_family(sys, kv.branch)
    total = field_const(sys.kind, 0)
    for k, f in zip(kv.values, fam):
        if k:
            total = total + f.scale(F(k))
    return total


def k_jacobian(sys: SystemSpec, coords: Sequence | None = None, branch: str | None = None) -> np.ndarray:
    """d(k_0..k_m)/d(coords) (default: the invertible block of :data:`REMARK_COORDS`)."""
    _n2_check(sys)
    branch = _branch(sys, branch)
    coords = REMARK_COORDS[sys.kind] if coords is None else coords
    cols = [k_map(sys, _unit(c), branch).as_array() for c in coords]
    return np.column_stack(cols)


def printed_jacobian(sys: SystemSpec, branch: str | None = None) -> float:
    """Closed form claimed for the Jacobian of the (k1..k_m) block: c1^4 c2^2 / 2 (S1), -2 c1^3 c2^4 (S2)."""
    c1, c2 = _owner_values(sys, _branch(sys, branch))
    if sys.kind is SystemKind.S1:
        return 0.5 * c1 ** 4 * c2 ** 2
    return -2.0 * c1 ** 3 * c2 ** 4


# --------------------------------------------------------------------------
# bounds and zero counting
# --------------------------------------------------------------------------
def bound_for(sys: SystemSpec, n: int, smooth: bool) -> int:
    """Upper bound on the number of zeros of M in Sigma for degree-n perturbations.

    Examples
    --------
    >>> from pfab.systems import make_system
    >>> bound_for(make_system("s1"), 2, smooth=False)
    38
    """
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a nonnegative integer, got {n!r}")
    n = int(n)
    kind = sys.kind
    if not smooth:
        if kind is SystemKind.S1:
            return 4 * n + 30
        if kind is SystemKind.S2:
            return 10 * n - 4 if n >= 1 else 2
        if kind is SystemKind.R19:
            return 4 * n - 3 if n >= 4 else 11
        return 4 * n + 3 if n >= 3 else 8
    if kind is SystemKind.S1:
        return 2 * n
    if kind is SystemKind.S2:
        return 2 * n - 1 if n >= 1 else 1
    if kind is SystemKind.R19:
        return 2 * n - 3 if n >= 4 else 4
    return 2 * n if n >= 3 else 3


def bound_source(smooth: bool) -> str:
    return "upper-bound/smooth" if smooth else "upper-bound/discontinuous"


@dataclass
class ZeroReport:
    """Zeros of a function found on an interval (evidence, not a certificate)."""

    interval: tuple
    zeros: list = field(default_factory=list)  # (h, |f(h)|, simple)
    count: int = 0
    bound: int | None = None
    bound_source: str | None = None
    tangencies: list = field(default_factory=list)  # h of possible even-order zeros
    identically_zero: bool = False

    @property
    def within_bound(self) -> bool:
        return self.bound is None or self.count <= self.bound

    def to_json_dict(self) -> dict:
        return {
            "interval": [float(x) for x in self.interval],
            "identically_zero": self.identically_zero,
            "count": self.count,
            "zeros": [{"h": float(h), "residual": float(r), "simple": bool(s)} for h, r, s in self.zeros],
            "tangencies": [float(t) for t in self.tangencies],
            "bound": self.bound,
            "bound_source": self.bound_source,
        }


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    span = hi - lo
    g = np.geomspace(0.25, 1e-12, max(n // 8, 4))
    parts = [np.linspace(lo, hi, n), lo + span * g, hi - span * g]
    if lo > 0 and hi / lo > 100:
        parts.append(np.geomspace(lo, hi, n))
    elif hi < 0 and lo / hi > 100:
        parts.append(-np.geomspace(-hi, -lo, n))
    pts = np.unique(np.concatenate(parts))
    return pts[(pts > lo) & (pts < hi)]


def _vectorize(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, FieldElem):
        return lambda x: evaluate_certified(f, x)

    def g(x):
        x = np.asarray(x, dtype=float)
        try:
            v = np.asarray(f(x), dtype=float)
            if v.shape == x.shape:
                return v
        except Exception:  # scalar-only callables
            pass
        return np.array([float(f(float(t))) for t in np.atleast_1d(x)])

    return g


def count_zeros(f, interval, grid: int = 2048, tangency_tol: float = 1e-8, passes: int = 2,
                bound: int | None = None, source: str | None = None) -> ZeroReport:
    """Sign-change zeros of ``f`` on the open ``interval``.

    ``f`` is a :class:`FieldElem` (evaluated with certified signs) or a
    callable of h.  After the sign scan, each interior local minimum of |f|
    without a sign change is searched for a dip; if f changes sign there the two
    hidden zeros are added, and if |f| drops below ``tangency_tol`` times the
    local scale the point is flagged as a possible even-order zero (not
    counted).  ``passes`` repeats the search on a grid refined by midpoints.

    Examples
    --------
    >>> rep = count_zeros(lambda h: h, (-1.0, 1.0))
    >>> rep.count, abs(rep.zeros[0][0]) < 1e-15
    (1, True)
    """
    if grid < 2:
        raise DomainError("grid must have at least two points")
    lo, hi = float(interval[0]), float(interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("count_zeros needs a finite interval (truncate unbounded ends first)")
    F_ = _vectorize(f)
    scalar = lambda x: float(F_(np.array([x]))[0])  # noqa: E731
    pts = _grid(lo, hi, grid)
    vals = F_(pts)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("function is not finite on the sampling grid")
    rep = ZeroReport((lo, hi), bound=bound, bound_source=source)
    if not np.any(vals):
        rep.identically_zero = True
        return rep

    brackets = []
    tang = []

    def local_scale(i):
        return float(np.max(np.abs(vals[max(0, i - 3): i + 4])))

    for _ in range(max(passes, 1)):
        brackets, tang = [], []
        nz = np.flatnonzero(vals)
        # exact zeros on the grid count when the sign flips across them
        for a, b in zip(nz, nz[1:]):
            if np.sign(vals[a]) != np.sign(vals[b]):
                brackets.append((pts[a], pts[b], a))
        absv = np.abs(vals)
        for i in range(1, len(pts) - 1):
            if vals[i] == 0:
                if vals[i - 1] * vals[i + 1] > 0:
                    tang.append(float(pts[i]))
                continue
            if absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1]:
                if np.sign(vals[i - 1]) != np.sign(vals[i]) or np.sign(vals[i + 1]) != np.sign(vals[i]):
                    continue
                # minimise the signed function: |f| has kinks at a hidden pair
                sgn = float(np.sign(vals[i]))
                res = minimize_scalar(lambda x: sgn * scalar(x), bounds=(pts[i - 1], pts[i + 1]),
                                      method="bounded", options={"xatol": 1e-15 * max(1.0, abs(pts[i]))})
                xm = float(res.x)
                fm = scalar(xm)
                if np.sign(fm) == -np.sign(vals[i]) and fm != 0:
                    brackets.append((pts[i - 1], xm, i))
                    brackets.append((xm, pts[i + 1], i))
                elif abs(fm) <= tangency_tol * local_scale(i):
                    tang.append(xm)
        if passes <= 1:
            break
        mids = 0.5 * (pts[:-1] + pts[1:])
        pts = np.concatenate([pts, mids])
        order = np.argsort(pts)
        pts = pts[order]
        vals = np.concatenate([vals, F_(mids)])[order]
        passes -= 1

    for a, b, i in sorted(brackets):
        if scalar(a) == 0:
            z = a
        elif scalar(b) == 0:
            z = b
        else:
            z = brentq(scalar, a, b, xtol=4 * np.finfo(float).eps * max(abs(a), abs(b), 1e-300),
                       rtol=8.9e-16, maxiter=400)
        rep.zeros.append((z, abs(scalar(z)), _is_simple(scalar, z, a, b)))
    rep.zeros.sort()
    rep.count = len(rep.zeros)
    rep.tangencies = sorted(tang)
    return rep


def _is_simple(f, z, a, b) -> bool:
    # near a simple zero f(z + 2d) / f(z + d) -> 2; a triple zero gives 8
    # probe well inside the bracket but far above the rounding floor
    d = 0.25 * min(z - a, b - z) if min(z - a, b - z) > 0 else 1e-6 * max(1.0, abs(z))
    for s in (+1, -1):
        f1, f2 = f(z + s * d), f(z + 2 * s * d)
        if f1 == 0 or not 1.5 < f2 / f1 < 3.0:
            return False
    return True


def scan_interval(sys: SystemSpec, branch: str, e: FieldElem | None = None, rel_cut: float = 1e-12) -> tuple:
    """Finite interval for zero scans on one annulus.

    Finite ends are pulled in by ``rel_cut``; an infinite end is truncated at
    :func:`pfab.symfield.tail_radius` of ``e`` (radius 10**6 when no
    element is given).
    """
    iv = _interval(sys, branch)
    lo, hi = iv.lo, iv.hi
    if math.isfinite(lo):
        lo = lo + rel_cut * max(1.0, abs(lo))
    if math.isfinite(hi):
        hi = hi - rel_cut * max(1.0, abs(hi))
    if not math.isfinite(hi):
        hi = tail_radius(e, lo, +1) if e is not None else 1e6
        hi = max(hi, 10 * max(1.0, abs(lo)))
    if not math.isfinite(lo):
        lo = tail_radius(e, hi, -1) if e is not None else -1e6
        lo = min(lo, -10 * max(1.0, abs(hi)))
    return lo, hi


def melnikov_zero_reports(sys: SystemSpec, pert: PerturbationPoly, grid: int = 2048) -> list:
    """One :class:`ZeroReport` per annulus for the exact M(h) of ``pert``."""
    bound = bound_for(sys, pert.n, pert.is_smooth())
    out = []
    for iv in sys.sigma:
        e = melnikov_field(sys, pert, iv.branch)
        interval = scan_interval(sys, iv.branch, e)
        rep = count_zeros(e, interval, grid=grid, bound=bound, source=bound_source(pert.is_smooth()))
        out.append(rep)
    return out


# --------------------------------------------------------------------------
# realisation of the sharp n = 2 counts
# --------------------------------------------------------------------------
def _null_vector(rows) -> list:
    with mpmath.workdps(50):
        A = mpmath.matrix(rows)
        m, n = A.rows, A.cols
        if n != m + 1:
            raise DomainError("need exactly one more unknown than conditions")
        U, S, V = mpmath.svd_r(A, full_matrices=True)
        smax = max(abs(s) for s in S)
        if min(abs(s) for s in S) <= mpmath.mpf(10) ** -30 * smax:
            raise NumericalError("degenerate target configuration: kernel dimension > 1")
        return [V[n - 1, j] for j in range(n)]


def realize_max(sys: SystemSpec, targets: Sequence[float], smooth: bool = False,
                grid: int = 2048) -> PerturbationPoly:
    """Degree-2 perturbation whose M has simple zeros exactly at ``targets``.

    Discontinuous: 5 targets (S1) or 6 (S2) in one annulus; the perturbation
    lives on the coordinates of :data:`REMARK_COORDS`.  ``smooth=True``
    restricts to symmetric perturbations, which reach only 1 (S1) or 2 (S2)
    zeros.

    Raises
    ------
    NumericalError
        If the kernel is not one-dimensional or the verification scan does
        not find exactly the requested simple zeros.
    """
    _n2_check(sys)
    targets = sorted(float(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise DomainError("targets must be distinct")
    branch = branch_of(sys, targets[0]).branch
    if any(branch_of(sys, t).branch != branch for t in targets):
        raise DomainError("all targets must lie in one annulus")
    fam = melnikov_family(sys, branch)
    members = _SMOOTH_MEMBERS[sys.kind] if smooth else tuple(range(len(fam)))
    if len(targets) != len(members) - 1:
        raise DomainError(f"need {len(members) - 1} targets, got {len(targets)}")
    rows = [[evaluate_stable(fam[m], t) for m in members] for t in targets]
    null = [float(x) for x in _null_vector(rows)]
    scale = max(abs(x) for x in null)
    k = np.zeros(len(fam))
    for m, x in zip(members, null):
        k[m] = x / scale

    if smooth:
        coords = _SMOOTH_COORDS[sys.kind]
        units = [_sym_unit(c) for c in coords]
        J = np.column_stack([k_map(sys, u, branch).as_array()[list(members)] for u in units])
        sol = np.linalg.solve(J, k[list(members)])
        pert = _sym_pert(coords, sol)
    else:
        coords = REMARK_COORDS[sys.kind]
        J = k_jacobian(sys, coords, branch)
        sol = np.linalg.solve(J, k)
        pert = _pert_from(coords, sol)

    e = melnikov_closed(sys, k_map(sys, pert, branch))
    rep = count_zeros(e, scan_interval(sys, branch, e), grid=grid)
    found = [z for z, _, s in rep.zeros if s]
    if rep.count != len(targets) or len(found) != len(targets) or rep.tangencies:
        raise NumericalError(f"verification found zeros {[z for z, _, _ in rep.zeros]} instead of {targets}")
    for z, t in zip(found, targets):
        if abs(z - t) > 1e-8 * max(1.0, abs(t)):
            raise NumericalError(f"zero {z} misses the target {t}")
    return pert


def _pert_from(coords, values) -> PerturbationPoly:
    maps = {"a+": {}, "a-": {}, "b+": {}, "b-": {}}
    for (which, i, j), v in zip(coords, values):
        if v:
            maps[which][(i, j)] = float(v)
    return PerturbationPoly(2, maps["a+"], maps["a-"], maps["b+"], maps["b-"])


def _sym_unit(coord) -> PerturbationPoly:
    return _sym_pert([coord], [1.0])


def _sym_pert(coords, values) -> PerturbationPoly:
    a, b = {}, {}
    for (which, i, j), v in zip(coords, values):
        if v:
            (a if which == "a" else b)[(i, j)] = float(v)
    return PerturbationPoly(2, a, dict(a), b, dict(b))


# --------------------------------------------------------------------------
# randomized bound audit
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class AuditRow:
    kind: str
    n: int
    smooth: bool
    trial: int
    count: int
    tangencies: int
    bound: int

    @property
    def ok(self) -> bool:
        return self.count <= self.bound


def bound_audit(sys: SystemSpec, n: int, smooth: bool, trials: int, rng: np.random.Generator,
                grid: int = 1024) -> list:
    """Zero counts of M over all of Sigma for ``trials`` random perturbations."""
    rows = []
    for t in range(trials):
        pert = PerturbationPoly.random(n, rng, smooth=smooth)
        reps = melnikov_zero_reports(sys, pert, grid=grid)
        rows.append(AuditRow(sys.kind.value, n, smooth, t, sum(r.count for r in reps),
                             sum(len(r.tangencies) for r in reps), bound_for(sys, n, smooth)))
    return rows
