from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis.strategies import fractions, tuples

from conftest import hirzebruch
from toric_extremal.abreu import (
    HMatrix,
    PointOnBoundary,
    SymplecticPotential,
    abreu_scalar,
    boundary_check,
    face_positivity,
    guillemin_h,
    guillemin_hmatrix,
    integrability_check,
    p_lambda,
)
from toric_extremal.calabi import make_fibration
from toric_extremal.cp2bundle import AnsatzCoeffs, CP2BundleParams, ansatz_H, distinguished_solution
from toric_extremal.poly import MultiPoly, RatFunc
from toric_extremal.polytope import interval, standard_simplex

z = MultiPoly.var(1, 0)
H_interval = HMatrix.exact([[2 * z - 2 * z * z]])
H_FS = HMatrix.fubini_study(2)


def test_guillemin_h_values():
    assert guillemin_h(interval(), [0.5])[0, 0] == pytest.approx(0.5)
    h = guillemin_h(standard_simplex(2), [1 / 3, 1 / 3])
    assert np.allclose(h, (2 / 9) * np.array([[2, -1], [-1, 2]]))


def test_exact_guillemin_inverse():
    assert SymplecticPotential(interval()).h_matrix() == H_interval
    assert SymplecticPotential(standard_simplex(2)).h_matrix() == H_FS


def test_hessian_off_interior_raises():
    with pytest.raises(PointOnBoundary):
        SymplecticPotential(interval()).hessian([[0.0]])


def test_scalar_curvature_of_fubini_study():
    F1 = make_fibration(interval(), [])
    F2 = make_fibration(standard_simplex(2), [])
    assert abreu_scalar(H_interval, F1) == RatFunc.lift(4, 1)
    assert abreu_scalar(H_FS, F2) == RatFunc.lift(12, 2)
    assert p_lambda(H_interval, F1).is_zero()
    assert p_lambda(H_FS, F2).is_zero()
    assert not p_lambda(H_FS.scaled(2), F2).is_zero()


def test_scalar_matches_sympy_on_trapezoid():
    P = hirzebruch(1, 3, 1)
    F = make_fibration(P, [])
    H = SymplecticPotential(P).h_matrix()
    scal = abreu_scalar(H, F)
    x, y = sp.symbols("x y")
    L = [x, y, 1 - y, 3 - x - y]
    U = sum(l * sp.log(l) for l in L) / 2
    Hs = sp.Matrix([[sp.diff(U, a, b) for b in (x, y)] for a in (x, y)]).inv()
    ref = -sum(sp.diff(Hs[r, s], v, w) for r, v in enumerate((x, y)) for s, w in enumerate((x, y)))
    for pt in [(Fraction(1, 2), Fraction(1, 3)), (Fraction(2), Fraction(1, 5))]:
        assert scal(pt) == Fraction(str(sp.nsimplify(sp.simplify(ref.subs({x: pt[0], y: pt[1]})))))


def test_numeric_scalar_matches_exact():
    P = hirzebruch(1, 3, 1)
    F = make_fibration(P, [])
    exact = abreu_scalar(SymplecticPotential(P).h_matrix(), F)
    numeric = abreu_scalar(guillemin_hmatrix(P), F)
    for pt in [(0.5, 0.3), (1.7, 0.6), (0.2, 0.1)]:
        assert numeric(pt) == pytest.approx(float(exact(pt)), rel=1e-6, abs=1e-6)


def test_boundary_conditions():
    S = standard_simplex(2)
    assert boundary_check(H_FS, S).passed
    rep = boundary_check(HMatrix.exact([[1, 0], [0, 1]]), S)
    assert not rep.passed
    assert all(f.exact is False for f in rep.facets)
    assert boundary_check(H_interval, interval()).passed


@settings(max_examples=20)
@given(tuples(*[fractions(-5, 5, max_denominator=4)] * 6))
def test_ansatz_always_meets_boundary_conditions(vals):
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    H = ansatz_H(AnsatzCoeffs.make(*vals), P)
    assert boundary_check(H, standard_simplex(2)).passed


def test_numeric_guillemin_boundary_limit():
    P = hirzebruch(1, 3, 1)
    rep = boundary_check(guillemin_hmatrix(P), P, tol=1e-6, resolution=6)
    assert rep.passed


def test_kernel_vanishes_linearly_near_facet():
    S = standard_simplex(2)
    u = np.array([1.0, 0.0])
    H = guillemin_hmatrix(S)
    ratios = []
    for d in (1e-2, 1e-3, 1e-4):
        ratios.append(np.linalg.norm(H(np.array([d, 0.4]))[0] @ u) / d)
    # ||H u|| / dist tends to a finite non-zero limit
    assert ratios[-1] == pytest.approx(ratios[-2], rel=1e-2)


def test_positivity():
    S = standard_simplex(2)
    rep = face_positivity(H_FS, S, 50)
    assert rep.positive and rep.first_negative is None
    interior = next(f for f in rep.faces if f.dim == 2)
    assert interior.min_eigenvalue > 1e-3
    neg = face_positivity(-H_FS, S, 50)
    assert not neg.positive
    assert neg.first_negative is not None


def test_positivity_genus_zero_ansatz():
    P = CP2BundleParams.from_genus(0, 1, 2, 1)
    H = ansatz_H(distinguished_solution(P), P)
    assert face_positivity(H, standard_simplex(2), 50).positive


def test_integrability():
    S = standard_simplex(2)
    assert integrability_check(H_FS, S).integrable
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    rep = integrability_check(ansatz_H(distinguished_solution(P), P), S)
    assert rep.exact_zero is False and rep.max_residual > 0
    assert integrability_check(H_interval, interval()).integrable
    assert integrability_check(guillemin_hmatrix(hirzebruch(1, 3, 1)), hirzebruch(1, 3, 1), resolution=6).integrable
