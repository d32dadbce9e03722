from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pfab.errors import DomainError
from pfab.quadrature import IntegralIndex, integral_I
from pfab.symfield import (basis_family, closed_form_shapes, differentiate, ect_check, evaluate,
                           evaluate_array, evaluate_certified, evaluate_stable, field_const, field_h,
                           fit_constants, generator, log_gen, melnikov_family, printed_wronskian,
                           tail_radius, wronskian)
from pfab.systems import make_system

from conftest import INTERIOR, KINDS

# one representative element per system, using every generator
ELEMS = {
    "s1": lambda: generator("s1", "S") * field_h("s1", (1, 2)) + log_gen("s1") * field_h("s1", (0, 0, 3)),
    "s2": lambda: generator("s2", "u") * generator("s2", "v") + log_gen("s2").scale(F(1, 3)) + field_h("s2"),
    "r19": lambda: generator("r19", "S") * log_gen("r19") - field_h("r19", (F(-1, 64), 1)),
    "r20": lambda: (generator("r20", "S") + field_h("r20", (0, 2))) * log_gen("r20"),
}


def num_deriv(e, h):
    # 4th-order central difference on values exact to ~30 digits
    d = 1e-3 * h
    f = [float(evaluate(e, h + k * d, dps=40)) for k in (-2, -1, 1, 2)]
    return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * d)


@pytest.mark.parametrize("kind", KINDS)
def test_derivative_matches_numeric(kind):
    e = ELEMS[kind]()
    for h in INTERIOR[kind][next(iter(INTERIOR[kind]))][:3]:
        assert float(evaluate(differentiate(e), h)) == pytest.approx(num_deriv(e, h), rel=1e-8)


@given(st.floats(0.05, 0.95))
def test_product_rule(h):
    a, b = ELEMS["s2"](), generator("s2", "v") + field_h("s2", (1, 1))
    lhs = differentiate(a * b)
    rhs = differentiate(a) * b + a * differentiate(b)
    assert (lhs - rhs).is_zero()


def test_algebraic_relations_reduce():
    # S^2 = h^2 + h is folded back into Q(h)
    S = generator("s1", "S")
    assert S * S == field_h("s1", (0, 1, 1))


def test_wronskian_of_monomials():
    fam = [field_const("s2", 1), field_h("s2"), field_h("s2", (0, 0, 1))]
    assert wronskian(fam, 3) == field_const("s2", 2)
    with pytest.raises(DomainError):
        wronskian(fam, 4)


@pytest.mark.parametrize("kind", KINDS)
def test_array_and_mp_evaluation_agree(kind):
    e = ELEMS[kind]()
    hs = np.array([h for v in INTERIOR[kind].values() for h in v])
    arr = evaluate_array(e, hs)
    ref = [float(evaluate(e, h, dps=40)) for h in hs]
    assert arr == pytest.approx(ref, rel=1e-12)
    assert evaluate_certified(e, hs) == pytest.approx(ref, rel=1e-12)


def test_stable_evaluation_near_singular_end():
    # W_6 of the S1 family cancels catastrophically as h -> 0
    W = wronskian(basis_family(make_system("s1")), 6)
    v = evaluate_stable(W, 1e-5)
    assert float(v) == pytest.approx(printed_wronskian("s1", 6, 1e-5), rel=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_closed_forms(kind):
    sys = make_system(kind)
    for branch, hs in INTERIOR[kind].items():
        consts = fit_constants(sys, hs[0])
        shapes = closed_form_shapes(sys, branch)
        for name, shape in shapes.items():
            i, j = name[2:-1].split(",")
            for h in hs[1:]:
                q = integral_I(sys, h, IntegralIndex.of(i, int(j)))
                assert consts[name] * float(evaluate(shape, h)) == pytest.approx(q, rel=1e-9)


def test_s1_constants():
    c = fit_constants(make_system("s1"), 1.0)
    assert c["I[0,0]"] == pytest.approx(4.0, rel=1e-12)
    assert c["I[1,1]"] == pytest.approx(np.pi * np.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("m", range(1, 7))
def test_printed_wronskians_s1(m):
    W = wronskian(basis_family(make_system("s1")), m)
    for h in (0.1, 1.0, 7.0, -1.5, -4.0):
        assert float(evaluate(W, h, dps=50)) == pytest.approx(printed_wronskian("s1", m, h), rel=1e-10)


@pytest.mark.parametrize("m", range(1, 5))
def test_printed_wronskians_s2_low_order(m):
    W = wronskian(basis_family(make_system("s2")), m)
    for h in (0.1, 0.4, 0.8):
        assert float(evaluate(W, h, dps=50)) == pytest.approx(printed_wronskian("s2", m, h), rel=1e-10)


def test_printed_s2_w5_disagrees():
    W = wronskian(basis_family(make_system("s2")), 5)
    a, b = float(evaluate(W, 0.4, dps=50)), printed_wronskian("s2", 5, 0.4)
    assert abs(a - b) > 1e-2 * abs(b)


def test_ect_s2_melnikov_family():
    fam = melnikov_family(make_system("s2"))
    assert ect_check(fam, (1e-4, 1 - 1e-4), samples=60).is_ect_evidence


def test_ect_detects_sign_change():
    # W_2[1, (h - 1/2)^2] = 2h - 1 changes sign at 1/2
    fam = [field_const("s2", 1), field_h("s2", (F(1, 4), -1, 1))]
    rep = ect_check(fam, (0.1, 0.9), samples=50)
    assert not rep.is_ect_evidence and rep.sign_changes_per_k == (0, 1)


def test_ect_needs_finite_interval():
    with pytest.raises(DomainError):
        ect_check(basis_family(make_system("s1")), (0.1, np.inf))


def test_tail_radius():
    # h^2 - 100 has its last sign change at 10; the radius is beyond it
    e = field_h("s1", (-100, 0, 1))
    r = tail_radius(e, 0.0, +1, safety=10)
    assert r >= 100
    assert tail_radius(field_h("s1", (1, 1)), -1.0, -1, safety=10) == -11.0


def test_family_sizes():
    s1, s2 = make_system("s1"), make_system("s2")
    assert len(basis_family(s1)) == 6 and len(basis_family(s2)) == 7
    assert melnikov_family(s1, "neg")[0] == field_h("s1", (1, 1))
    assert melnikov_family(s2)[-1] == log_gen("s2")
    with pytest.raises(DomainError):
        melnikov_family(make_system("r19"))
