from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis.strategies import composite, fractions, integers, lists, sampled_from

from toric_extremal.calabi import BaseFactor, make_fibration
from toric_extremal.poly import MultiPoly
from toric_extremal.polytope import build_polytope, interval, standard_simplex

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=50
)
settings.load_profile("default")


def rect(a, b):
    return build_polytope([([1, 0], 0), ([0, 1], 0), ([-1, 0], a), ([0, -1], b)])


def hirzebruch(k, a, b):
    """Trapezoid {z1, z2 >= 0, z2 <= b, z1 + k z2 <= a}; Delzant when a > k b."""
    return build_polytope([([1, 0], 0), ([0, 1], 0), ([0, -1], b), ([-1, -k], a)])


@pytest.fixture
def simplex2():
    return standard_simplex(2)


@pytest.fixture
def unit_interval():
    return interval()


@composite
def unimodular(draw, n=2):
    """Products of elementary integer matrices (determinant +-1)."""
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(draw(integers(0, 3))):
        i = draw(integers(0, n - 1))
        j = draw(integers(0, n - 1).filter(lambda x: x != i))
        k = draw(integers(-2, 2))
        m = [row[:] for row in m]
        for col in range(n):
            m[i][col] += k * m[j][col]
    if draw(integers(0, 1)):
        m[0] = [-x for x in m[0]]
    return m


@composite
def base_polytopes(draw):
    kind = draw(sampled_from(["simplex", "rect", "hirzebruch"]))
    if kind == "simplex":
        return standard_simplex(2)
    if kind == "rect":
        return rect(draw(integers(1, 3)), draw(integers(1, 3)))
    k = draw(integers(1, 2))
    b = draw(integers(1, 2))
    return hirzebruch(k, k * b + draw(integers(1, 2)), b)


@composite
def delzant_polytopes(draw):
    P = draw(base_polytopes())
    T = draw(unimodular())
    shift = [draw(fractions(-2, 2, max_denominator=5)) for _ in range(2)]
    return P.transformed(T, shift)


@composite
def fibrations(draw, max_factors=2):
    P = draw(delzant_polytopes())
    factors = []
    for _ in range(draw(integers(0, max_factors))):
        p = [Fraction(draw(integers(-3, 3))) for _ in range(P.dim_l)]
        low = min(sum(a * x for a, x in zip(p, v)) for v in P.vertices)
        c = -low + draw(fractions(Fraction(1, 7), 3, max_denominator=7))
        d = draw(integers(1, 3))
        scal = draw(fractions(-8, 8, max_denominator=3))
        factors.append(BaseFactor.make(d, scal, p, c))
    return make_fibration(P, factors)


@composite
def polys(draw, nvars=2, max_degree=4, max_terms=6):
    terms = {}
    for _ in range(draw(integers(0, max_terms))):
        exps = tuple(draw(lists(integers(0, max_degree), min_size=nvars, max_size=nvars)))
        if sum(exps) > max_degree:
            continue
        terms[exps] = draw(fractions(-5, 5, max_denominator=6))
    return MultiPoly(nvars, terms)
