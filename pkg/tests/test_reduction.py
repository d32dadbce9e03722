from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfab.polyrat import PolyRat
from pfab.quadrature import integral_I, melnikov_quadrature
from pfab.reduction import (BASIS, BasisCombo, degree_details, degree_report, is_reachable, log_generator,
                            reachable_indices, reduce_integral, reduce_melnikov)
from pfab.systems import PerturbationPoly, make_system, rho_coefficients

from conftest import KINDS, interior_points


def basis_values(sys, h):
    return {b: integral_I(sys, h, b, rtol=1e-13) for b in BASIS[sys.kind]}


@pytest.mark.parametrize("kind", KINDS)
def test_basis_reduces_to_itself(kind):
    sys = make_system(kind)
    for b in BASIS[sys.kind]:
        c = reduce_integral(sys, b)
        assert c.coeffs == {b: PolyRat.const(1)} and c.log_coefficient.is_zero()


@pytest.mark.parametrize("kind", KINDS)
def test_reduction_matches_quadrature(kind):
    sys = make_system(kind)
    hs = interior_points(kind)[:2]
    vals = {h: basis_values(sys, h) for h in hs}
    for idx in reachable_indices(sys, 5):
        c = reduce_integral(sys, idx)
        for h in hs:
            ref = integral_I(sys, h, idx)
            assert c.evaluate(h, vals[h]) == pytest.approx(ref, rel=1e-9), (idx, h)


def test_known_reductions():
    s1 = make_system("s1")
    assert str(reduce_integral(s1, (3, 0))) == "(2*h + 1)*I[0,0]"
    r19 = make_system("r19")
    # the only pure-log integral: I_{3/2,0} = 4L
    c = reduce_integral(r19, ("3/2", 0))
    assert not c.coeffs and c.log_coefficient == PolyRat.const(4)


def test_log_generator():
    h = 0.3
    assert log_generator(h) == pytest.approx(np.log(64 * h - np.sqrt(4096 * h * h - 1)), rel=1e-10)


def test_reachability():
    s2, r20 = make_system("s2"), make_system("r20")
    assert is_reachable(s2, 3, 2) and not is_reachable(s2, F(1, 2), 1)
    assert is_reachable(r20, F(1, 2), 1) and not is_reachable(r20, F(1, 3), 1)
    assert not is_reachable(s2, -2, 0)
    assert len(reachable_indices(s2, 8)) == 55


@pytest.mark.parametrize("kind", KINDS)
def test_reduce_melnikov_matches_quadrature(kind, rng):
    sys = make_system(kind)
    p = PerturbationPoly.random(3, rng)
    combo = reduce_melnikov(sys, p)
    for h in interior_points(kind)[:2]:
        assert combo.evaluate(h, basis_values(sys, h)) == pytest.approx(melnikov_quadrature(sys, p, h), rel=1e-8)


@given(st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_reduce_melnikov_is_linear(n, seed):
    sys = make_system("s2")
    rng = np.random.default_rng(seed)
    p = PerturbationPoly.random(n, rng)
    neg = PerturbationPoly(n, *({k: -v for k, v in getattr(p, name).items()}
                                for name in ("a_plus", "a_minus", "b_plus", "b_minus")))
    assert (reduce_melnikov(sys, p) + reduce_melnikov(sys, neg)).is_zero()


def test_json_round_trip(rng):
    c = reduce_melnikov(make_system("r20"), PerturbationPoly.random(3, rng))
    assert BasisCombo.from_json_dict(c.to_json_dict()) == c


def test_r19_log_coefficient_low_degree(rng):
    # for n <= 2 the log coefficient is 8 rho_{0,2} h exactly
    sys = make_system("r19")
    for _ in range(5):
        p = PerturbationPoly.random(2, rng)
        rho0 = rho_coefficients(sys, p, exact=True).get((F(0), 2), F(0))
        assert reduce_melnikov(sys, p).log_coefficient == PolyRat.h() * (8 * rho0)


def test_r19_log_coefficient_a03_term():
    # a^+_{0,3} feeds I_{-1,4}, whose reduction carries -h/4 L
    sys = make_system("r19")
    p = PerturbationPoly(3, {(0, 3): 1.0})
    rho0 = rho_coefficients(sys, p, exact=True).get((F(0), 2), F(0))
    assert rho0 == 0
    lc = reduce_melnikov(sys, p).log_coefficient
    # rho_{-1,4} = (0 - 3/2 - 1)/4 = -5/8
    assert lc == PolyRat.h() * (F(-5, 8) * F(-1, 4))


@pytest.mark.parametrize("kind,n", [("s1", 4), ("s1", 6), ("s2", 3), ("s2", 5), ("r19", 2), ("r19", 6),
                                    ("r20", 2), ("r20", 4)])
def test_degree_bounds_hold(kind, n, rng):
    sys = make_system(kind)
    for _ in range(3):
        assert degree_report(reduce_melnikov(sys, PerturbationPoly.random(n, rng)), n)


@pytest.mark.parametrize("kind,n,entry", [("s1", 2, "gamma"), ("s2", 2, "beta"), ("r20", 5, "tau*h")])
def test_degree_bounds_known_failures(kind, n, entry, rng):
    sys = make_system(kind)
    det = degree_details(reduce_melnikov(sys, PerturbationPoly.random(n, rng)), n)
    assert not det["ok"] and not det["entries"][entry][2]
