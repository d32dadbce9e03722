import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfab.errors import DomainError
from pfab.quadrature import (IntegralIndex, dy_integral, integral_I, integral_J, integral_table,
                             melnikov_quadrature, oval_endpoints)
from pfab.systems import PerturbationPoly, branch_of, half_energy, make_system

from conftest import KINDS, interior_points


def mp_integral(sys, h, i, j):
    """Independent oracle: tanh-sinh on the raw x-integral of the upper half-oval."""
    mpmath.mp.dps = 30
    g = oval_endpoints(sys, h)
    k = mpmath.mpf(sys.k.numerator) / sys.k.denominator
    e = mpmath.mpf(F(i).numerator) / F(i).denominator - k - 1

    def phi(x):
        return (h * abs(x) ** k if x > 0 else h * (-x) ** int(k)) - float(sys.lambda2) * x * x \
            - float(sys.lambda1) * x - float(sys.lambda0)

    def f(x):
        base = x ** e if x > 0 else (-1) ** int(e) * (-x) ** e
        return base * mpmath.sqrt(max(2 * phi(x), 0)) ** j

    val = mpmath.quad(f, [g.x1, g.x2])
    return branch_of(sys, h).orientation * float(val)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("ij", [(0, 0), (1, 1), (0, 2), (2, 1), (-1, 3)])
def test_against_mpmath(kind, ij):
    sys = make_system(kind)
    for h in interior_points(kind)[:3]:
        ref = mp_integral(sys, h, *ij)
        assert integral_I(sys, h, ij) == pytest.approx(ref, rel=1e-9, abs=1e-300)


def test_known_value():
    # S1, h = 1: I_{0,0} = 4 sqrt(h^2 + h)
    assert integral_I(make_system("s1"), 1.0, (0, 0)) == pytest.approx(4 * math.sqrt(2), rel=1e-13)


@pytest.mark.parametrize("kind", KINDS)
def test_endpoints_are_roots(kind):
    sys = make_system(kind)
    for h in interior_points(kind):
        g = oval_endpoints(sys, h)
        gb = oval_endpoints(sys, h, method="bisect")
        assert (g.x1, g.x2) == pytest.approx((gb.x1, gb.x2), rel=1e-10)
        for x in (g.x1, g.x2):
            scale = max(1.0, abs(h * x), x * x)
            assert abs(half_energy(sys, h, x)) < 1e-11 * scale
        assert half_energy(sys, h, 0.5 * (g.x1 + g.x2)) > 0


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_lower_branch_symmetry(kind, j):
    sys = make_system(kind)
    h = interior_points(kind)[1]
    assert integral_J(sys, h, (1, j)) == pytest.approx((-1) ** (j + 1) * integral_I(sys, h, (1, j)), rel=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_dy_integration_by_parts(kind):
    # int x^m y^j dy = -m/(j+1) int x^(m-1) y^(j+1) dx
    sys = make_system(kind)
    h = interior_points(kind)[1]
    for m, j in [(1, 0), (2, 1), (3, 2)]:
        lhs = dy_integral(sys, h, m, j)
        rhs = -m / (j + 1) * integral_I(sys, h, (F(m - 1) + sys.k + 1, j + 1))
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_index_normalisation():
    assert IntegralIndex.of("1/2", 1) == IntegralIndex.of(0.5, 1) == IntegralIndex(F(1, 2), 1)
    assert str(IntegralIndex.of(-1, 1)) == "I[-1,1]"
    with pytest.raises(DomainError):
        IntegralIndex.of(0, -1)


def test_domain_errors():
    s2 = make_system("s2")
    for h in (-0.1, 1.0, 1.5, 0.0, 1e-12):
        with pytest.raises(DomainError):
            integral_I(s2, h, (0, 1))


@given(st.floats(0.01, 0.99))
def test_s2_monotone_area(h):
    # I_{0,1} is (pi/sqrt 2) h on S2: strictly increasing in h
    s2 = make_system("s2")
    assert integral_I(s2, h, (0, 1)) == pytest.approx(math.pi / math.sqrt(2) * h, rel=1e-11)


def test_table_sorted():
    rows = integral_table(make_system("s2"), [0.7, 0.2, 0.5], (1, 1))
    assert [h for h, _ in rows] == [0.2, 0.5, 0.7]


def test_melnikov_quadrature_linear(rng):
    sys = make_system("r19")
    p = PerturbationPoly.random(2, rng)
    q = PerturbationPoly.random(2, rng)
    s = PerturbationPoly(2, *(
        {k: getattr(p, name).get(k, 0) + getattr(q, name).get(k, 0) for k in set(getattr(p, name)) | set(getattr(q, name))}
        for name in ("a_plus", "a_minus", "b_plus", "b_minus")))
    h = 0.1
    assert melnikov_quadrature(sys, s, h) == pytest.approx(
        melnikov_quadrature(sys, p, h) + melnikov_quadrature(sys, q, h), rel=1e-10)
