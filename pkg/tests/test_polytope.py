from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis.strategies import integers, lists

from conftest import delzant_polytopes, hirzebruch, polys, rect, unimodular
from toric_extremal.exact import bareiss_det, nullspace, primitive, rank, solve
from toric_extremal.poly import MultiPoly
from toric_extremal.polytope import (
    EmptyInterior,
    NotBounded,
    NotDelzant,
    PLConvexFunction,
    PolytopeError,
    boundary_moment,
    build_polytope,
    crease,
    interval,
    moment,
    pl_evaluate,
    sample_face,
    standard_simplex,
)

z1, z2 = MultiPoly.var(2, 0), MultiPoly.var(2, 1)


# exact linear algebra


@given(lists(lists(integers(-4, 4), min_size=3, max_size=3), min_size=3, max_size=3))
def test_bareiss_matches_sympy(rows):
    assert bareiss_det(rows) == sp.Matrix(rows).det()
    assert rank(rows) == sp.Matrix(rows).rank()


def test_solve_and_nullspace():
    x = solve([[2, 1], [1, 3]], [3, 5])
    assert x == [Fraction(4, 5), Fraction(7, 5)]
    ns = nullspace([[1, 1, 1]], 3)
    assert len(ns) == 2
    assert all(sum(v) == 0 for v in ns)
    assert primitive([Fraction(2, 3), Fraction(4, 3)]) == (1, 2)


# construction


def test_standard_simplex_vertices():
    P = build_polytope([([1, 0], 0), ([0, 1], 0), ([-1, -1], 1)])
    assert sorted(P.vertices) == [(0, 0), (0, 1), (1, 0)]
    assert P.dim_l == 2 and P.n_facets == 3


def test_interval():
    P = build_polytope([([1], 0), ([-1], 1)])
    assert P.dim_l == 1
    assert sorted(P.vertices) == [(0,), (1,)]


def test_not_delzant_reports_vertex():
    # (1,0) and (-1,-2) meet at (0, 1/2) with determinant -2; the corner at
    # (1,0), cut out by (0,1) and (-1,-2), is unimodular
    with pytest.raises(NotDelzant) as err:
        build_polytope([([1, 0], 0), ([0, 1], 0), ([-1, -2], 1)])
    assert err.value.vertex == (0, Fraction(1, 2))


def test_rejections():
    with pytest.raises(NotBounded):
        build_polytope([([1, 0], 0), ([0, 1], 0)])
    with pytest.raises(EmptyInterior):
        build_polytope([([1], 0), ([-1], -1)])
    with pytest.raises(PolytopeError):  # redundant half-space
        build_polytope([([1, 0], 0), ([0, 1], 0), ([-1, -1], 1), ([-1, 0], 5)])


def test_faces_counts():
    P = hirzebruch(1, 3, 1)
    assert len(P.faces_of_dim(0)) == 4
    assert len(P.faces_of_dim(1)) == 4
    assert len(P.faces_of_dim(2)) == 1
    assert P.faces[0].active == ()


# moments


def test_simplex_moments(simplex2):
    assert moment(simplex2, MultiPoly.constant(2, 1)) == Fraction(1, 2)
    assert moment(simplex2, z1) == Fraction(1, 6)
    assert moment(simplex2, z1 * z1) == Fraction(1, 12)
    assert moment(simplex2, z1 * z2) == Fraction(1, 24)


def test_boundary_moments(simplex2):
    one = MultiPoly.constant(2, 1)
    assert boundary_moment(simplex2, one) == 3
    assert boundary_moment(simplex2, z1) == 1
    per_facet = [boundary_moment(simplex2, z1, facets=[i]) for i in range(3)]
    assert sorted(per_facet) == [0, Fraction(1, 2), Fraction(1, 2)]
    assert boundary_moment(interval(), MultiPoly.constant(1, 1)) == 2


def test_moment_matches_sympy_on_trapezoid():
    P = hirzebruch(1, 3, 1)
    x, y = sp.symbols("x y")
    q = z1**3 * z2 + 2 * z2**2 - 1
    ref = sp.integrate(sp.integrate(x**3 * y + 2 * y**2 - 1, (x, 0, 3 - y)), (y, 0, 1))
    assert moment(P, q) == Fraction(int(ref.p), int(ref.q))


@given(delzant_polytopes(), polys(max_degree=3))
def test_lattice_invariance(P, q):
    """moment(T P + s, q o (T, s)^-1) = moment(P, q) for unimodular T."""
    T = [[1, 1], [0, 1]]
    Q = P.transformed(T, [Fraction(1, 2), -1])
    # inverse map: z = T^-1 (w - s)
    w1, w2 = MultiPoly.var(2, 0) - Fraction(1, 2), MultiPoly.var(2, 1) + 1
    pulled = q.compose([w1 - w2, w2])
    assert moment(Q, pulled) == moment(P, q)
    assert boundary_moment(Q, pulled) == boundary_moment(P, q)


@given(delzant_polytopes(), polys(max_degree=3), polys(max_degree=3))
def test_divergence_identity(P, V1, V2):
    """int div V dv = -sum_i int <u_i, V> dsigma."""
    lhs = moment(P, V1.diff(0) + V2.diff(1))
    rhs = -sum(
        boundary_moment(P, u[0] * V1 + u[1] * V2, facets=[i]) for i, (u, _) in enumerate(P.halfspaces)
    )
    assert lhs == rhs


def test_triangulation_independence():
    # the same square cut differently: as a polytope and as two simplices
    P = rect(1, 1)
    q = z1 * z1 * z2 + 3
    lower = standard_simplex(2)
    upper = lower.transformed([[-1, 0], [0, -1]], [1, 1])
    assert moment(P, q) == moment(lower, q) + moment(upper, q)


# PL functions and sampling


def test_pl_evaluate_examples():
    f = crease((1, 1), Fraction(3, 10))
    assert pl_evaluate(f, (0.5, 0.1)) == pytest.approx(0.3)
    assert pl_evaluate(f, (0.1, 0.1)) == 0
    g = PLConvexFunction.of([((0, 0), 0), ((1, -1), 0)])
    assert pl_evaluate(g, (0.2, 0.5)) == 0


def test_crease_walls(simplex2):
    f = crease((1, 1), Fraction(1, 2))
    walls = list(f.creases(simplex2))
    assert len(walls) == 1
    u, mult, wall = walls[0]
    assert tuple(u) in [(1, 1), (-1, -1)] and mult == 1
    # lattice length of {z1 + z2 = 1/2} inside the simplex
    assert wall.integrate(MultiPoly.constant(2, 1), normal=u) == Fraction(1, 2)


def test_sample_face_is_interior(simplex2):
    pts = sample_face(simplex2, simplex2.faces[0], 10)
    assert len(pts) > 0
    assert np.all(pts > 0) and np.all(pts.sum(axis=1) < 1)
    edge = sample_face(simplex2, simplex2.facet(0), 10)
    u, c = simplex2.halfspaces[0]
    assert np.allclose(edge @ np.array(u, dtype=float) + float(c), 0)
