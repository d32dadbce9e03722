import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfab.errors import DomainError
from pfab.systems import (PerturbationPoly, SystemKind, branch_of, half_energy, hamiltonian,
                          make_system, rho_coefficients, unperturbed_field, vector_field)

from conftest import KINDS, interior_points


def test_parse_kind():
    assert SystemKind.parse(" S2 ") is SystemKind.S2
    with pytest.raises(DomainError):
        SystemKind.parse("s3")


def test_centers_sit_on_the_boundary(system):
    edges = {e for iv in system.sigma for e in (iv.lo, iv.hi)}
    for c in system.centers:
        h = hamiltonian(system, float(c.x), float(c.y))
        assert h == pytest.approx(float(c.h), abs=1e-15)
        assert float(c.h) in edges
        # a center is an equilibrium of the unperturbed field
        u, v = unperturbed_field(system, float(c.x), 0.0)
        assert abs(u) < 1e-15 and abs(v) < 1e-15


def _grad(sys, x, y, d=1e-6):
    hx = (hamiltonian(sys, x + d, y) - hamiltonian(sys, x - d, y)) / (2 * d)
    hy = (hamiltonian(sys, x, y + d) - hamiltonian(sys, x, y - d)) / (2 * d)
    return hx, hy


@pytest.mark.parametrize("kind", KINDS)
@given(x=st.floats(0.2, 3.0), y=st.floats(-1.0, 1.0))
def test_h_is_a_first_integral(kind, x, y):
    sys = make_system(kind)
    hx, hy = _grad(sys, x, y)
    u, v = unperturbed_field(sys, x, y)
    scale = (abs(hx) + abs(hy)) * (abs(u) + abs(v)) + 1e-12
    assert abs(hx * u + hy * v) <= 1e-7 * scale


def test_first_integral_negative_x():
    sys = make_system("s1")
    for x, y in [(-0.5, 0.3), (-2.0, -1.1)]:
        hx, hy = _grad(sys, x, y)
        u, v = unperturbed_field(sys, x, y)
        assert abs(hx * u + hy * v) < 1e-7


@pytest.mark.parametrize("kind", KINDS)
def test_half_energy_matches_h(kind):
    sys = make_system(kind)
    for h in interior_points(kind):
        x, y = 1.3 if h > 0 else -1.3, 0.4
        h0 = hamiltonian(sys, x, y)
        assert half_energy(sys, h0, x) == pytest.approx(0.5 * y * y, rel=1e-12, abs=1e-14)


def test_branch_of():
    s1 = make_system("s1")
    assert branch_of(s1, 2.0).branch == "pos"
    assert branch_of(s1, -2.0).branch == "neg"
    for bad in (-0.5, 0.0, -1.0, math.nan):
        with pytest.raises(DomainError):
            branch_of(s1, bad)
    with pytest.raises(DomainError):
        branch_of(make_system("r19"), 1 / 64)


def test_exact_parameters():
    r19 = make_system("r19")
    assert r19.k == F(3, 2) and r19.lambda1 == F(1, 128) and r19.lambda0 == 0


coef = st.floats(-5, 5, allow_nan=False).filter(lambda c: c != 0.0)


@st.composite
def perts(draw, max_n=4):
    n = draw(st.integers(0, max_n))
    idx = st.tuples(st.integers(0, n), st.integers(0, n)).filter(lambda t: sum(t) <= n)
    maps = [draw(st.dictionaries(idx, coef, max_size=4)) for _ in range(4)]
    return PerturbationPoly(n, *maps)


@given(perts())
def test_json_round_trip(p):
    q = PerturbationPoly.from_json(p.to_json())
    assert q == p
    assert json.loads(q.to_json()) == json.loads(p.to_json())


def test_json_rejects_bad_input():
    with pytest.raises(DomainError):
        PerturbationPoly.from_json_dict({"n": 1, "a+": {"2,0": 1.0}})
    with pytest.raises(DomainError):
        PerturbationPoly.from_json_dict({"a+": {}})
    with pytest.raises(DomainError):
        PerturbationPoly.from_json_dict({"n": 1, "c+": {}})
    with pytest.raises(DomainError):
        PerturbationPoly(-1)


def test_random_is_reproducible():
    a = PerturbationPoly.random(3, np.random.default_rng(5))
    b = PerturbationPoly.random(3, np.random.default_rng(5))
    assert a == b and not a.is_smooth()
    assert PerturbationPoly.random(3, np.random.default_rng(5), smooth=True).is_smooth()


def test_vector_field_sides():
    sys = make_system("s2")
    p = PerturbationPoly(1, {(0, 0): 1.0}, {}, {(1, 0): 2.0}, {})
    u0, v0 = unperturbed_field(sys, 0.8, 0.1)
    u, v = vector_field(sys, "upper", 0.01, p, 0.8, 0.1)
    assert (u - u0, v - v0) == pytest.approx((0.01, 0.016))
    assert vector_field(sys, "lower", 0.01, p, 0.8, 0.1) == (u0, v0)
    with pytest.raises(DomainError):
        vector_field(sys, "middle", 0.01, p, 0.8, 0.1)


def test_rho_folding():
    # b-part: rho_{i,j} = b+ + (-1)^(j+1) b-; a-part moves to (i-1, j+1)
    sys = make_system("s1")
    p = PerturbationPoly(2, {(1, 1): 1.0}, {(1, 1): 3.0}, {(0, 2): 2.0}, {(0, 2): 5.0})
    rho = rho_coefficients(sys, p, exact=True)
    # a-factor (i - k - 1)/(j + 1) = -1/2, sign (-1)^j = -1
    assert rho[(F(0), 2)] == (2 - 5) + F(-1, 2) * (1 - 3)


def test_smooth_perturbation_kills_odd_rho():
    sys = make_system("s2")
    p = PerturbationPoly.random(3, np.random.default_rng(0), smooth=True)
    rho = rho_coefficients(sys, p)
    # for a smooth field the y-even integrals cancel between the two halves
    assert all(j % 2 == 1 for (_, j) in rho)
