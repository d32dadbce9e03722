from fractions import Fraction as F

import numpy as np
import pytest

from pfab.errors import DomainError
from pfab.picard_fuchs import basis_vector, derivative_identity_residual, pf_matrix, pf_residual, pf_system
from pfab.polyrat import PolyRat
from pfab.systems import make_system

from conftest import KINDS, interior_points


@pytest.mark.parametrize("kind", KINDS)
def test_residual_small(kind):
    sys = make_system(kind)
    for h in interior_points(kind):
        assert pf_residual(sys, h) < 1e-7


@pytest.mark.parametrize("kind", KINDS)
def test_residual_detects_a_wrong_matrix(kind):
    # perturbing one entry by 1% must show up far above the tolerance
    sys = make_system(kind)
    h = interior_points(kind)[1]
    A = pf_matrix(sys, h).copy()
    A[0, 0] *= 1.01
    V = basis_vector(sys, h)
    d = 1e-5 * max(1.0, abs(h))
    dV = (basis_vector(sys, h + d) - basis_vector(sys, h - d)) / (2 * d)
    assert np.max(np.abs(V - A @ dV)) / np.max(np.abs(V)) > 1e-4


def test_s1_determinant():
    det = pf_system(make_system("s1")).det()
    h = PolyRat.h()
    assert det == h * h * (h + 1) * (h + 1) / 2


def test_matrix_at_rationals():
    A = pf_system(make_system("s2"))
    assert A(F(1, 2))[2].tolist() == [2.0, 0.0, -1.0, 0.0]


@pytest.mark.parametrize("kind", KINDS)
def test_singular_points_refused(kind):
    sys = make_system(kind)
    for s in pf_system(sys).singular:
        with pytest.raises(DomainError):
            pf_matrix(sys, float(s))


@pytest.mark.parametrize("kind,idx", [("s1", (2, 0)), ("s2", (3, 1)), ("r19", ("5/2", 0)), ("r20", (1, 1))])
def test_derivative_identity(kind, idx):
    sys = make_system(kind)
    for h in interior_points(kind)[:2]:
        assert derivative_identity_residual(sys, h, *idx) < 1e-7


def test_stencil_inside_annulus():
    with pytest.raises(DomainError):
        pf_residual(make_system("s2"), 0.999, step=0.01)
