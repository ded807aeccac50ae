import json
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis.strategies import fractions, integers

from toric_extremal.abreu import HMatrix, p_lambda
from toric_extremal.cp2bundle import (
    AnsatzCoeffs,
    CP2BundleParams,
    analyze,
    ansatz_H,
    crease_closed_form_c0,
    crease_F,
    distance_to_fubini_study,
    distinguished_solution,
    extremal_residual,
    integrability_residual,
    lin_int_residual,
    v_constants,
)


def test_params_validation():
    P = CP2BundleParams.from_genus(3, 1, 2, "1/1000")
    assert P.C == 8 and P.c == Fraction(1, 1000) and P.admissible
    for bad in [(3, 2, 2, 1), (3, 0, 2, 1), (3, 1, 2, 0), (-1, 1, 2, 1)]:
        with pytest.raises(ValueError):
            CP2BundleParams.from_genus(*bad)
    assert not CP2BundleParams.raw(1, 2, 1, -20).admissible


def test_v_constants_frozen():
    v0, v1, v2 = v_constants(CP2BundleParams.from_genus(3, 1, 2, 1))
    assert v0 == Fraction(-592, 189)
    # independent evaluation of the same closed form with sympy
    c, C, p1, p2 = sp.Integer(1), sp.Integer(8), sp.Integer(1), sp.Integer(2)
    den = 2 * (50 * c**3 + 50 * c**2 * p1 + 13 * c * p1**2 + p1**3 + 50 * c**2 * p2
               + 37 * c * p1 * p2 + 5 * p1**2 * p2 + 13 * c * p2**2 + 5 * p1 * p2**2 + p2**3)
    n1 = 15 * c * p1**2 + 3 * p1**3 - 15 * c * p1 * p2 + 3 * p1**2 * p2 + 5 * c * p2**2 - 3 * p1 * p2**2 + p2**3
    ref = -(12 * c + C + 4 * p1 + 4 * p2) * n1 / den
    assert v1 == Fraction(int(ref.p), int(ref.q))


def test_v_constants_vanish_for_large_c():
    vs = v_constants(CP2BundleParams.from_genus(3, 1, 2, 10**6))
    assert all(abs(v) < 1e-4 for v in vs)


def test_residuals():
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    sol = distinguished_solution(P)
    assert extremal_residual(sol, P) == (0, 0, 0)
    assert lin_int_residual(sol) == (0, 0, 0)
    assert extremal_residual(AnsatzCoeffs.zero(), P) == tuple(-v for v in v_constants(P))
    assert integrability_residual(AnsatzCoeffs.make(1, 2, 3, 0, 0, 0), P) == (0, 0)
    assert integrability_residual(sol, P) != (0, 0)


@settings(max_examples=25)
@given(integers(0, 6), integers(1, 4), integers(1, 4), fractions(Fraction(1, 8), 20, max_denominator=8))
def test_distinguished_solution_is_extremal(genus, p1, dp, c):
    P = CP2BundleParams.from_genus(genus, p1, p1 + dp, c)
    H = ansatz_H(distinguished_solution(P), P)
    assert p_lambda(H, P.fibration()).is_zero()


def test_extremal_equations_against_abreu_pipeline():
    """Any coefficients solving the three extremal equations give P_lambda = 0,
    not only the distinguished one."""
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    v0, v1, v2 = v_constants(P)
    x0, x1, x2 = Fraction(1, 3), Fraction(-2), Fraction(5, 7)
    coeffs = AnsatzCoeffs.make(x0, x1, x2, v0 - x1 - x2, v1 - x0 - x2, v2 - x0 - x1)
    assert extremal_residual(coeffs, P) == (0, 0, 0)
    assert p_lambda(ansatz_H(coeffs, P), P.fibration()).is_zero()
    off = AnsatzCoeffs.make(x0, x1, x2, v0 - x1 - x2 + 1, v1 - x0 - x2, v2 - x0 - x1)
    assert not p_lambda(ansatz_H(off, P), P.fibration()).is_zero()


def test_crease_closed_form_examples():
    P = CP2BundleParams.raw(1, 2, 0, 8)
    assert crease_F(P, Fraction(1, 10)) == 0
    assert crease_F(P, Fraction(1, 20)) == Fraction(-19, 960000)


@given(integers(1, 4), integers(1, 4), integers(-4, 40), integers(1, 99))
def test_crease_closed_form_at_c_zero(p1, dp, C, k):
    P = CP2BundleParams.raw(p1, p1 + dp, 0, C)
    a = Fraction(k, 100)
    assert crease_F(P, a) == crease_closed_form_c0(P, a)


def test_crease_continuous_at_c_zero():
    a = Fraction(1, 20)
    target = crease_closed_form_c0(CP2BundleParams.raw(1, 2, 0, 8), a)
    gaps = [abs(crease_F(CP2BundleParams.from_genus(3, 1, 2, Fraction(1, 10**k)), a) - target) for k in (3, 5, 7)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_crease_rejects_endpoints():
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    for a in (0, 1, 2):
        with pytest.raises(ValueError):
            crease_F(P, a)


def test_fubini_study_limit():
    d = [distance_to_fubini_study(CP2BundleParams.from_genus(3, 1, 2, c)) for c in (10, 100, 1000)]
    assert d[0] > d[1] > d[2]
    big = distinguished_solution(CP2BundleParams.from_genus(3, 1, 2, 10**6))
    assert all(abs(x) < 1e-4 for x in big.as_tuple())


def test_analyze_verdicts():
    rep = analyze(CP2BundleParams.from_genus(3, 1, 2, Fraction(1, 1000)), resolution=50)
    assert rep.verdicts["extremal_kahler_excluded"]["value"] is True
    assert rep.verdicts["kahler_solution_in_ansatz"]["value"] is False
    assert rep.certificates["extremal_residual"]["p_lambda_zero"] is True
    assert rep.certificates["boundary"]["passed"] is True
    assert rep.untraceable_verdicts() == []
    for c in (Fraction(1, 4), 1, 4):
        rep = analyze(CP2BundleParams.from_genus(0, 1, 2, c), resolution=50)
        assert rep.verdicts["extremal_almost_kahler"]["value"] is True
    rep = analyze(CP2BundleParams.from_genus(3, 1, 2, 100), resolution=50)
    assert rep.verdicts["extremal_almost_kahler"]["value"] is True
    assert rep.verdicts["extremal_kahler_excluded"]["value"] is False


def test_analyze_report_is_deterministic():
    P = CP2BundleParams.from_genus(3, 1, 2, 1)
    a = analyze(P, resolution=10).to_json()
    b = analyze(P, resolution=10).to_json()
    assert a == b
    data = json.loads(a)
    assert data["computed"]["v"][0] == "-592/189"
    assert data["conventions"]["crease_weight"]
