"""Exact reduction of the generating integrals to a small basis.

Three linear relations with coefficients in Q[h] drive everything:

(A)   h I(i,j) = 1/2 I(i-k,j+2) + l2 I(i-k+2,j) + l1 I(i-k+1,j) + l0 I(i-k,j)
      -- multiply the integrand by h = H(x, y).
(B)   D I(i,j) = 2j [l2 (2-k) I(i+2,j-2) + l1 (1-k) I(i+1,j-2) - l0 k I(i,j-2)],
      D = 2i + kj - 2k, j >= 2  -- integrate d(x^m y^j) over the half-oval.
(C)   (A) at (c, j) with (B) at (c-k, j+2) substituted: a three-term ladder
      along i at fixed j (step 1 for k in {1, 2}, step 1/2 for k in {3/2, 1/2}).

For j >= 2 an index is lowered by (B), or by (A) solved for its first term
when D = 0.  For j in {0, 1} the ladder (C) is walked from two adjacent seed
values.  The seeds are either basis integrals or short identities derived
from (A) and (C).  The reductions are identities between functions and do
not depend on the annulus or on the orientation of the oval.

For r19 and r20 one more transcendental enters, L = ln(64h - sqrt(4096h^2-1)),
through I(3/2, 0) (r19) resp. I(1/2, 0) (r20), both equal to 4L.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import ReductionError
from .polyrat import Poly, PolyRat
from .systems import PerturbationPoly, SystemKind, SystemSpec, make_system, rho_coefficients

__all__ = [
    "BasisCombo",
    "BASIS",
    "LOG_KEY",
    "reduce_integral",
    "reduce_melnikov",
    "degree_report",
    "degree_details",
    "is_reachable",
    "reachable_indices",
]

F = Fraction
LOG_KEY = "L"

# basis integrals per system, in the order used for printing
BASIS = {
    SystemKind.S1: ((F(0), 0), (F(1), 1), (F(-1), 1), (F(0), 2)),
    SystemKind.S2: ((F(0), 1), (F(1), 0), (F(1), 1), (F(0), 2)),
    SystemKind.R19: ((F(1, 2), 1), (F(1), 1), (F(1), 0)),
    SystemKind.R20: ((F(0), 1), (F(1, 2), 1), (F(0), 0)),
}

# the integral that equals 4L (flow orientation)
_LOG_INTEGRAL = {SystemKind.R19: (F(3, 2), 0), SystemKind.R20: (F(1, 2), 0)}


def _key_str(key) -> str:
    if key == LOG_KEY:
        return "L"
    i, j = key
    return f"I[{i},{j}]"


@dataclass(frozen=True)
class BasisCombo:
    """sum_b coeffs[b] * I_b(h) + log_coefficient(h) * L(h).

    ``coeffs`` maps basis indices ``(Fraction i, int j)`` to exact rational
    functions of h.  ``log_coefficient`` multiplies L = ln(64h - sqrt(4096h^2-1))
    and is zero for S1 and S2.
    """

    kind: SystemKind
    coeffs: Mapping = field(default_factory=dict)
    log_coefficient: PolyRat = field(default_factory=PolyRat.zero)

    def __post_init__(self):
        basis = BASIS[self.kind]
        clean = {}
        for key, c in self.coeffs.items():
            if key not in basis:
                raise ReductionError(f"{_key_str(key)} is not a basis integral of {self.kind.value}")
            if not c.is_zero():
                clean[key] = c
        object.__setattr__(self, "coeffs", {b: clean[b] for b in basis if b in clean})

    # ---- algebra -------------------------------------------------------
    @classmethod
    def zero(cls, kind) -> "BasisCombo":
        return cls(kind)

    def is_zero(self) -> bool:
        return not self.coeffs and self.log_coefficient.is_zero()

    def __add__(self, other: "BasisCombo") -> "BasisCombo":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out[key] + c if key in out else c
        return BasisCombo(self.kind, out, self.log_coefficient + other.log_coefficient)

    def scale(self, r) -> "BasisCombo":
        if not isinstance(r, PolyRat):
            r = PolyRat.const(Fraction(r))
        return BasisCombo(self.kind, {k: c * r for k, c in self.coeffs.items()}, self.log_coefficient * r)

    def __eq__(self, other):
        if not isinstance(other, BasisCombo):
            return NotImplemented
        return (self.kind == other.kind and self.coeffs == other.coeffs
                and self.log_coefficient == other.log_coefficient)

    def coefficient(self, i, j) -> PolyRat:
        return self.coeffs.get((F(i), int(j)), PolyRat.zero())

    # ---- evaluation ----------------------------------------------------
    def evaluate(self, h: float, basis_values: Mapping, log_value: float | None = None) -> float:
        """Numerical value given the basis integrals (keyed like ``coeffs``)."""
        total = 0.0
        for key, c in self.coeffs.items():
            total += float(c(Fraction(h) if isinstance(h, Fraction) else h)) * basis_values[key]
        if not self.log_coefficient.is_zero():
            if log_value is None:
                log_value = log_generator(h)
            total += float(self.log_coefficient(h)) * log_value
        return total

    # ---- io --------------------------------------------------------------
    def __str__(self):
        parts = []
        for key, c in self.coeffs.items():
            parts.append(f"({c})*{_key_str(key)}")
        if not self.log_coefficient.is_zero():
            parts.append(f"({self.log_coefficient})*ln(64h - sqrt(4096h^2 - 1))")
        return " + ".join(parts) if parts else "0"

    def to_json_dict(self) -> dict:
        return {
            "system": self.kind.value,
            "terms": [
                {"basis": _key_str(key), "coefficient": c.to_json()} for key, c in self.coeffs.items()
            ],
            "log_coefficient": self.log_coefficient.to_json(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "BasisCombo":
        kind = SystemKind.parse(d["system"])
        coeffs = {}
        for t in d["terms"]:
            body = t["basis"][2:-1]
            i, j = body.split(",")
            coeffs[(F(i), int(j))] = PolyRat.from_json(t["coefficient"])
        return cls(kind, coeffs, PolyRat.from_json(d["log_coefficient"]))


def log_generator(h: float) -> float:
    """L(h) = ln(64h - sqrt(4096h^2 - 1)), written as -ln(64h + sqrt(...))."""
    return -math.log(64.0 * h + math.sqrt(4096.0 * h * h - 1.0))


# --------------------------------------------------------------------------
# the reduction engine
# --------------------------------------------------------------------------
_H = PolyRat.h()


def _c(x) -> PolyRat:
    return PolyRat.const(Fraction(x))


class _Reducer:
    """Memoised top-down reduction for one system (thread-safe)."""

    def __init__(self, sys: SystemSpec):
        self.sys = sys
        self.kind = sys.kind
        self.k = sys.k
        self.l0, self.l1, self.l2 = sys.lambda0, sys.lambda1, sys.lambda2
        self.step = F(1) if sys.k.denominator == 1 else F(1, 2)
        self.memo: dict = {}
        self.lock = threading.RLock()

    # linear combination helper: list of (PolyRat, key) -> internal dict
    def _lin(self, terms):
        out: dict = {}
        for coef, (i, j) in terms:
            if coef.is_zero():
                continue
            for key, c in self.reduce(i, j).items():
                out[key] = out[key] + coef * c if key in out else coef * c
        return {k: v for k, v in out.items() if not v.is_zero()}

    def reduce(self, i, j) -> dict:
        i = F(i)
        key = (i, j)
        with self.lock:
            hit = self.memo.get(key)
            if hit is not None:
                return hit
            if not is_reachable(self.sys, i, j):
                raise ReductionError(f"I[{i},{j}] is outside the reachable index set of {self.kind.value}")
            res = self._compute(i, j)
            self.memo[key] = res
            return res

    # --------------------------------------------------------------------
    def _compute(self, i, j) -> dict:
        key = (i, j)
        if key in BASIS[self.kind]:
            return {key: _c(1)}
        if self.kind in _LOG_INTEGRAL and key == _LOG_INTEGRAL[self.kind]:
            return {LOG_KEY: _c(4)}
        seed = self._seed(i, j)
        if seed is not None:
            return self._lin(seed)
        if j >= 2:
            return self._lower_j(i, j)
        return self._ladder(i, j)

    def _seed(self, i, j):
        """Short identities that start the ladders (see module docstring)."""
        kind = self.kind
        if kind is SystemKind.S1:
            if (i, j) == (1, 0):
                # (A) at (1,0) with I(2,0) = I(0,0)
                d = PolyRat(Poly([1, 2]))
                return [(_c(1) / d, (F(0), 0)), (_c(1) / d, (F(0), 2))]
            if (i, j) == (0, 1):
                # ladder relation at (0,1) solved for I(0,1)
                d = PolyRat(Poly([1, 2]))
                return [(_c(2) / d, (F(-1), 1)), (_c(-1) / d, (F(1), 1))]
        if kind is SystemKind.S2 and (i, j) == (2, 0):
            # (A) at (2,0) with I(0,0) = I(1,0) and I(-1,2) = 4h/3 I(1,0), solved for I(2,0)
            d = PolyRat(Poly([-2, 2]))
            return [(_c(1) / d, (F(0), 2)), (_c(-2) / d, (F(1), 0))]
        return None

    def _lower_j(self, i, j) -> dict:
        k, l0, l1, l2 = self.k, self.l0, self.l1, self.l2
        D = 2 * i + k * j - 2 * k
        if D != 0:
            # (B)
            s = F(2 * j) / D
            terms = [
                (_c(s * l2 * (2 - k)), (i + 2, j - 2)),
                (_c(s * l1 * (1 - k)), (i + 1, j - 2)),
                (_c(-s * l0 * k), (i, j - 2)),
            ]
        else:
            # (A) at (i+k, j-2), solved for I(i, j)
            terms = [
                (_H * 2, (i + k, j - 2)),
                (_c(-2 * l2), (i + 2, j - 2)),
                (_c(-2 * l1), (i + 1, j - 2)),
                (_c(-2 * l0), (i, j - 2)),
            ]
        return self._lin([(c, ij) for c, ij in terms if not c.is_zero()])

    def _ladder_coeffs(self, c, j):
        """(alpha, beta, gamma) with alpha I(c+d) + beta I(c) + gamma I(c-d) = 0."""
        k, l0, l1, l2 = self.k, self.l0, self.l1, self.l2
        Dp = 2 * c + k * j - 2 * k
        t = {  # coefficient of I(c + shift) on the right-hand side of (C)
            2 - k: l2 * ((j + 2) * (2 - k) + Dp),
            1 - k: l1 * ((j + 2) * (1 - k) + Dp),
            -k: l0 * (Dp - (j + 2) * k),
        }
        lhs = {F(0): _H * Dp}
        rel: dict = {}
        for shift, v in t.items():
            if v:
                rel[F(shift)] = rel.get(F(shift), _c(0)) + _c(v)
        rel[F(0)] = rel.get(F(0), _c(0)) - lhs[F(0)]
        rel = {s: v for s, v in rel.items() if not v.is_zero()}
        d = self.step
        # in every system the relation lives on {c-d, c, c+d} after shifting
        shifts = sorted(rel)
        if self.kind is SystemKind.S2:
            # shifts {0, -1, -2}: recentre at c-1
            return rel.get(F(0), _c(0)), rel.get(F(-1), _c(0)), rel.get(F(-2), _c(0)), c - 1
        if not set(shifts) <= {-d, F(0), d}:
            raise ReductionError(f"unexpected ladder shape {shifts} for {self.kind.value}")
        return rel.get(d, _c(0)), rel.get(F(0), _c(0)), rel.get(-d, _c(0)), c

    def _relation_at(self, centre, j):
        """Ladder relation whose middle index is ``centre``."""
        if self.kind is SystemKind.S2:
            a, b, g, mid = self._ladder_coeffs(centre + 1, j)
        else:
            a, b, g, mid = self._ladder_coeffs(centre, j)
        assert mid == centre
        return a, b, g

    def _ladder(self, i, j) -> dict:
        d = self.step
        # find the nearest pair of already-determined neighbours by direction:
        # go forward (i from below) when possible, otherwise backward.
        up_a, up_b, up_g = self._relation_at(i - d, j)  # involves i, i-d, i-2d
        lo_a, lo_b, lo_g = self._relation_at(i + d, j)  # involves i+2d, i+d, i
        if i > self._anchor(j) and not up_a.is_zero():
            # up_a I(i) + up_b I(i-d) + up_g I(i-2d) = 0
            return self._lin([(-up_b / up_a, (i - d, j)), (-up_g / up_a, (i - 2 * d, j))])
        if i < self._anchor(j) and not lo_g.is_zero():
            return self._lin([(-lo_b / lo_g, (i + d, j)), (-lo_a / lo_g, (i + 2 * d, j))])
        raise ReductionError(
            f"ladder (C) has a zero pivot at I[{i},{j}] for {self.kind.value}"
        )

    def _anchor(self, j):
        """Index along the ladder at/above which one walks forward."""
        return {
            (SystemKind.S1, 0): F(1), (SystemKind.S1, 1): F(1),
            (SystemKind.S2, 0): F(2), (SystemKind.S2, 1): F(1),
            (SystemKind.R19, 0): F(3, 2), (SystemKind.R19, 1): F(1),
            (SystemKind.R20, 0): F(1, 2), (SystemKind.R20, 1): F(1, 2),
        }[(self.kind, j)]


_REDUCERS: dict = {}
_REDUCERS_LOCK = threading.Lock()


def _reducer(sys: SystemSpec) -> _Reducer:
    with _REDUCERS_LOCK:
        r = _REDUCERS.get(sys.kind)
        if r is None:
            r = _REDUCERS[sys.kind] = _Reducer(make_system(sys.kind))
        return r


def is_reachable(sys: SystemSpec, i, j) -> bool:
    """i >= -1, j >= 0; i integral for S1/S2, half-integral allowed for r19/r20."""
    i = F(i)
    if j < 0 or int(j) != j or i < -1:
        return False
    if sys.kind in (SystemKind.S1, SystemKind.S2):
        return i.denominator == 1
    return i.denominator in (1, 2)


def reachable_indices(sys: SystemSpec, max_total) -> list:
    """All reachable (i, j) with i + j <= max_total."""
    step = F(1) if sys.kind in (SystemKind.S1, SystemKind.S2) else F(1, 2)
    out = []
    i = F(-1)
    while i <= max_total:
        for j in range(0, int(math.floor(max_total - i)) + 1):
            out.append((i, j))
        i += step
    return out


def _to_combo(kind, d: dict) -> BasisCombo:
    coeffs = {k: v for k, v in d.items() if k != LOG_KEY}
    return BasisCombo(kind, coeffs, d.get(LOG_KEY, PolyRat.zero()))


def reduce_integral(sys: SystemSpec, idx) -> BasisCombo:
    """I_{i,j} as a Q(h)-combination of the basis integrals (plus L for r19/r20).

    Examples
    --------
    >>> str(reduce_integral(make_system("s1"), (3, 0)))
    '(2*h + 1)*I[0,0]'
    """
    if hasattr(idx, "i"):
        i, j = idx.i, idx.j
    else:
        i, j = idx
    return _to_combo(sys.kind, _reducer(sys).reduce(F(i), int(j)))


def reduce_melnikov(sys: SystemSpec, pert: PerturbationPoly) -> BasisCombo:
    """M(h) = sum rho_{i,j} I_{i,j} pushed through :func:`reduce_integral`.

    All arithmetic is exact; float coefficients enter as their exact binary
    rational values.
    """
    total = BasisCombo.zero(sys.kind)
    for (i, j), r in rho_coefficients(sys, pert, exact=True).items():
        total = total + reduce_integral(sys, (i, j)).scale(r)
    return total


# --------------------------------------------------------------------------
# structure checks
# --------------------------------------------------------------------------
def _poly_or_none(r: PolyRat, prefactor: Poly):
    """prefactor * r as a polynomial, or None if it is not one."""
    return r.times_poly_is_poly(prefactor)


def _deg(p) -> int:
    return -1 if p is None or p.is_zero() else p.degree


def degree_details(combo: BasisCombo, n: int) -> dict:
    """Actual degrees of the structure polynomials next to their stated bounds.

    Returns a dict with ``entries`` (name -> (degree, bound, ok)), the
    prefactor used, and an overall ``ok``.  A degree of -1 denotes the zero
    polynomial; ``None`` marks a coefficient that is not a polynomial after
    clearing the stated prefactor.
    """
    kind = combo.kind
    entries = {}
    if kind is SystemKind.S1:
        pref = Poly([1, 2])
        names = {(F(0), 0): ("alpha", n - 1), (F(1), 1): ("beta", n - 1),
                 (F(-1), 1): ("gamma", n - 3), (F(0), 2): ("delta", 2)}
        pref_text = "1/(2h+1)"
    elif kind is SystemKind.S2:
        m = max(n - 2, 0)
        pref = Poly([-1, 1]) ** m
        nn = max(n, 2)
        names = {(F(0), 1): ("alpha", nn - 2), (F(1), 0): ("beta", nn - 1),
                 (F(1), 1): ("gamma", nn - 1), (F(0), 2): ("delta", nn - 2)}
        pref_text = f"1/(h-1)^{m}"
    elif kind is SystemKind.R19:
        pref = Poly([1])
        if n >= 4:
            b = {"alpha": 2 * n - 5, "beta": 2 * n - 4, "gamma": 2 * n - 4}
        else:
            b = {"alpha": 3, "beta": 2, "gamma": 2}
        names = {(F(1, 2), 1): ("alpha", b["alpha"]), (F(1), 1): ("beta", b["beta"]),
                 (F(1), 0): ("gamma", b["gamma"])}
        pref_text = "1"
    else:
        pref = Poly([1])
        if n >= 3:
            b = {"alpha": 2 * n - 4, "beta": 2 * n - 3, "gamma": 2 * n - 2}
        else:
            b = {"alpha": 2, "beta": 1, "gamma": 2}
        names = {(F(0), 1): ("alpha", b["alpha"]), (F(1, 2), 1): ("beta", b["beta"]),
                 (F(0), 0): ("gamma", b["gamma"])}
        pref_text = "1"
    ok = True
    for key, (name, bound) in names.items():
        c = combo.coeffs.get(key, PolyRat.zero())
        p = _poly_or_none(c, pref)
        deg = None if p is None else _deg(p)
        good = deg is not None and deg <= bound
        ok &= good
        entries[name] = (deg, bound, good)
    if kind in (SystemKind.R19, SystemKind.R20):
        lc = combo.log_coefficient
        tau_ok = lc.is_zero() or (lc.is_poly() and lc.num.degree == 1 and lc.num.c[0] == 0)
        entries["tau*h"] = (lc.degree_bound() if not lc.is_zero() else -1, 1, tau_ok)
        ok &= tau_ok
    return {"entries": entries, "prefactor": pref_text, "ok": ok}


def degree_report(combo: BasisCombo, n: int) -> bool:
    """True iff every structure polynomial of ``combo`` respects its degree bound."""
    return degree_details(combo, n)["ok"]
