"""Delzant polytopes, exact moment integrals and piecewise-linear convex functions.

All integrals use the lattice-normalized Lebesgue measure ``dv`` on the
momentum space. On a hyperplane piece with primitive normal ``u`` the measure
``dsigma`` is fixed by ``u ^ dsigma = -dv`` (taken with positive orientation),
which for a facet simplex spanned by edge vectors ``N`` equals
``|det[u/|u|^2, N]|`` times the standard-simplex measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import factorial
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exact import SingularSystem, bareiss_det, nullspace, primitive, rank, solve
from .poly import MultiPoly, as_fraction

Point = Tuple[Fraction, ...]
Constraint = Tuple[Tuple[Fraction, ...], Fraction]


class PolytopeError(ValueError):
    pass


class NotBounded(PolytopeError):
    pass


class EmptyInterior(PolytopeError):
    pass


class NotDelzant(PolytopeError):
    def __init__(self, message: str, vertex: Optional[Point] = None):
        super().__init__(message)
        self.vertex = vertex


def _value(con: Constraint, z: Sequence) -> Fraction:
    a, b = con
    return sum(ai * zi for ai, zi in zip(a, z)) + b


def affine_dim(points: Iterable[Point]) -> int:
    pts = list(points)
    if not pts:
        return -1
    base = pts[0]
    diffs = [[x - y for x, y in zip(p, base)] for p in pts[1:]]
    return rank(diffs) if diffs else 0


class Cell:
    """Rational polytope ``{<a,z>+b >= 0 for ineqs, <a,z>+b = 0 for eqs}``.

    Used for the pieces a PL function cuts out of a polytope, for facets and
    for crease walls. May be empty or lower dimensional.
    """

    def __init__(self, nvars: int, inequalities: Sequence, equalities: Sequence = ()):
        self.nvars = nvars
        self.inequalities = [_constraint(a, b) for a, b in inequalities]
        self.equalities = [_constraint(a, b) for a, b in equalities]

    @cached_property
    def vertices(self) -> List[Point]:
        rows = self.equalities + self.inequalities
        found = set()
        for subset in combinations(rows, self.nvars):
            mat = [list(a) for a, _ in subset]
            try:
                z = solve(mat, [-b for _, b in subset])
            except SingularSystem:
                continue
            z = tuple(z)
            if all(_value(c, z) >= 0 for c in self.inequalities) and all(
                _value(c, z) == 0 for c in self.equalities
            ):
                found.add(z)
        return sorted(found)

    @cached_property
    def dim(self) -> int:
        return affine_dim(self.vertices)

    @cached_property
    def simplices(self) -> List[Tuple[Point, ...]]:
        if self.dim < 0:
            return []
        return triangulate(frozenset(self.vertices), self.dim, self.inequalities)

    def integrate(self, q: MultiPoly, normal: Optional[Sequence[int]] = None) -> Fraction:
        """Exact integral of ``q``: full-dimensional when ``normal`` is None,
        else over a hyperplane piece with the ``dsigma`` measure of ``normal``.
        Cells of lower dimension than the measure integrate to zero."""
        want = self.nvars if normal is None else self.nvars - 1
        if self.dim < want:
            return Fraction(0)
        if self.dim > want:
            raise ValueError("cell dimension exceeds the measure dimension")
        return sum((simplex_integral(q, s, normal) for s in self.simplices), Fraction(0))


def _constraint(a, b) -> Constraint:
    return tuple(as_fraction(x) for x in a), as_fraction(b)


def triangulate(verts: frozenset, dim: int, inequalities: Sequence[Constraint]):
    """Pulling triangulation from the lexicographically smallest vertex.

    Facets of a face are its intersections with the tight sets of the
    defining inequalities; recursing on those not containing the apex gives
    a deterministic triangulation.
    """
    if dim == 0:
        return [(next(iter(verts)),)]
    apex = min(verts)
    subfaces = set()
    for con in inequalities:
        tight = frozenset(v for v in verts if _value(con, v) == 0)
        if apex in tight or len(tight) < dim:
            continue
        if affine_dim(tight) == dim - 1:
            subfaces.add(tight)
    out = []
    for face in sorted(subfaces, key=sorted):
        for s in triangulate(face, dim - 1, inequalities):
            out.append((apex,) + s)
    return out


def simplex_integral(q: MultiPoly, simplex: Sequence[Point], normal=None) -> Fraction:
    """Integrate ``q`` over a simplex via the pullback to the standard simplex,
    where ``int lambda^alpha = alpha! / (|alpha| + k)!``."""
    ell = q.nvars
    k = len(simplex) - 1
    w0 = simplex[0]
    edges = [[wi - oi for wi, oi in zip(w, w0)] for w in simplex[1:]]
    if normal is None:
        if k != ell:
            raise ValueError("full-dimensional integral needs an ell-simplex")
        jac = abs(bareiss_det(edges))
    else:
        if k != ell - 1:
            raise ValueError("hyperplane integral needs an (ell-1)-simplex")
        u = [Fraction(x) for x in normal]
        norm2 = sum(x * x for x in u)
        jac = abs(bareiss_det([[x / norm2 for x in u]] + edges))
    if jac == 0 or q.is_zero():
        return Fraction(0)
    images = [MultiPoly.affine([edges[j][i] for j in range(k)], w0[i]) for i in range(ell)]
    pulled = q.compose(images)
    total = Fraction(0)
    for alpha, c in pulled.terms.items():
        num = 1
        for a in alpha:
            num *= factorial(a)
        total += c * Fraction(num, factorial(sum(alpha) + k))
    return jac * total


@dataclass(frozen=True)
class Face:
    active: Tuple[int, ...]
    vertices: Tuple[Point, ...]
    dim: int


@dataclass(frozen=True)
class DelzantPolytope:
    """``{z : <u_i, z> + c_i >= 0}`` with primitive integer normals ``u_i``."""

    dim_l: int
    halfspaces: Tuple[Tuple[Tuple[int, ...], Fraction], ...]
    vertices: Tuple[Point, ...] = field(compare=False)
    faces: Tuple[Face, ...] = field(compare=False, repr=False)

    @property
    def normals(self) -> List[Tuple[int, ...]]:
        return [u for u, _ in self.halfspaces]

    @property
    def n_facets(self) -> int:
        return len(self.halfspaces)

    def affine(self, i: int) -> MultiPoly:
        """``<u_i, z> + c_i`` as a polynomial."""
        u, c = self.halfspaces[i]
        return MultiPoly.affine(u, c)

    def cell(self) -> Cell:
        return Cell(self.dim_l, self.halfspaces)

    def facet_cell(self, i: int) -> Cell:
        return Cell(self.dim_l, self.halfspaces, [self.halfspaces[i]])

    @cached_property
    def simplices(self):
        return self.cell().simplices

    @cached_property
    def facet_simplices(self):
        return [self.facet_cell(i).simplices for i in range(self.n_facets)]

    def contains(self, z, strict: bool = False) -> bool:
        vals = [_value((tuple(map(Fraction, u)), c), z) if _is_exact(z) else
                float(np.dot(u, z)) + float(c) for u, c in self.halfspaces]
        return all(v > 0 for v in vals) if strict else all(v >= 0 for v in vals)

    def distance_to_boundary(self, z) -> float:
        """Smallest lattice distance ``min_i <u_i,z>+c_i``."""
        return min(float(np.dot(u, z)) + float(c) for u, c in self.halfspaces)

    @property
    def barycenter(self) -> Point:
        n = len(self.vertices)
        return tuple(sum(v[i] for v in self.vertices) / n for i in range(self.dim_l))

    @property
    def diameter(self) -> float:
        v = np.array(self.vertices, dtype=float)
        return float(max(np.linalg.norm(a - b) for a in v for b in v))

    def faces_of_dim(self, k: int) -> List[Face]:
        return [f for f in self.faces if f.dim == k]

    def facet(self, i: int) -> Face:
        return next(f for f in self.faces if f.active == (i,))

    def transformed(self, matrix, shift) -> "DelzantPolytope":
        """Image under ``z -> T z + s`` for a unimodular integer ``T``."""
        tinv_t = [[Fraction(x) for x in row] for row in _inverse_transpose(matrix)]
        shift = [as_fraction(x) for x in shift]
        halfs = []
        for u, c in self.halfspaces:
            un = [sum(tinv_t[r][k] * u[k] for k in range(self.dim_l)) for r in range(self.dim_l)]
            cn = c - sum(a * s for a, s in zip(un, shift))
            halfs.append(([int(x) for x in un], cn))
        return build_polytope(halfs)


def _is_exact(z) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in z)


def _inverse_transpose(matrix):
    n = len(matrix)
    cols = []
    for k in range(n):
        e = [Fraction(int(i == k)) for i in range(n)]
        # rows of T^{-T} solve T^T x = e_k
        cols.append(solve([[matrix[j][i] for j in range(n)] for i in range(n)], e))
    return [[cols[k][r] for k in range(n)] for r in range(n)]


def build_polytope(halfspaces: Sequence) -> DelzantPolytope:
    """Validate a half-space description and enumerate vertices and faces."""
    if not halfspaces:
        raise PolytopeError("need at least one half-space")
    halfs = []
    for u, c in halfspaces:
        u = tuple(int(x) for x in u)
        if not any(u):
            raise PolytopeError("zero normal")
        halfs.append((u, as_fraction(c)))
    ell = len(halfs[0][0])
    if any(len(u) != ell for u, _ in halfs):
        raise PolytopeError("normals have inconsistent length")

    normals = [list(u) for u, _ in halfs]
    if rank(normals) < ell:
        raise NotBounded("normals do not span; the region contains a line")
    # a pointed cone {d : U d >= 0} is trivial iff it has no extreme ray
    for subset in combinations(normals, ell - 1):
        basis = nullspace(list(subset), ell)
        if len(basis) != 1:
            continue
        d = basis[0]
        for sgn in (1, -1):
            if all(sum(sgn * x * y for x, y in zip(u, d)) >= 0 for u in normals):
                raise NotBounded(f"unbounded in direction {[sgn * x for x in d]}")

    cell = Cell(ell, halfs)
    verts = cell.vertices
    if not verts or cell.dim < ell:
        raise EmptyInterior("polytope has empty interior")

    active = {}
    for v in verts:
        act = tuple(i for i, h in enumerate(halfs) if _value(h, v) == 0)
        if len(act) != ell:
            raise NotDelzant(f"vertex {_fmt(v)} is not simple ({len(act)} facets meet)", v)
        det = bareiss_det([halfs[i][0] for i in act])
        if abs(det) != 1:
            raise NotDelzant(
                f"active normals at vertex {_fmt(v)} have determinant {det}, not +-1", v
            )
        active[v] = act
    used = {i for act in active.values() for i in act}
    if used != set(range(len(halfs))):
        missing = sorted(set(range(len(halfs))) - used)
        raise PolytopeError(f"half-spaces {missing} are redundant (define no facet)")

    face_map = {}
    for v, act in active.items():
        for r in range(ell + 1):
            for sub in combinations(act, r):
                face_map.setdefault(sub, set()).add(v)
    faces = tuple(
        Face(active=k, vertices=tuple(sorted(vs)), dim=ell - len(k))
        for k, vs in sorted(face_map.items(), key=lambda kv: (len(kv[0]), kv[0]))
    )
    return DelzantPolytope(ell, tuple(halfs), tuple(verts), faces)


def _fmt(v) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def standard_simplex(ell: int) -> DelzantPolytope:
    halfs = []
    for i in range(ell):
        e = [0] * ell
        e[i] = 1
        halfs.append((e, 0))
    halfs.append(([-1] * ell, 1))
    return build_polytope(halfs)


def interval(a=0, b=1) -> DelzantPolytope:
    return build_polytope([((1,), -as_fraction(a)), ((-1,), as_fraction(b))])


def moment(P: DelzantPolytope, q: MultiPoly) -> Fraction:
    """Exact ``int_Delta q dv``."""
    if q.nvars != P.dim_l:
        raise ValueError("polynomial has the wrong number of variables")
    return sum((simplex_integral(q, s) for s in P.simplices), Fraction(0))


def boundary_moment(P: DelzantPolytope, q: MultiPoly, facets: Optional[Iterable[int]] = None) -> Fraction:
    """Exact ``int q dsigma`` over the selected facets (all by default)."""
    if q.nvars != P.dim_l:
        raise ValueError("polynomial has the wrong number of variables")
    idx = range(P.n_facets) if facets is None else facets
    total = Fraction(0)
    for i in idx:
        u = P.halfspaces[i][0]
        for s in P.facet_simplices[i]:
            total += simplex_integral(q, s, u)
    return total


def sample_face(P: DelzantPolytope, face: Face, resolution: int) -> np.ndarray:
    """Points strictly inside ``face`` on a barycentric grid of each simplex
    of the face triangulation."""
    if face.dim == 0:
        return np.array([face.vertices[0]], dtype=float)
    cons = [P.halfspaces[i] for i in range(P.n_facets)]
    simplices = triangulate(frozenset(face.vertices), face.dim, cons)
    pts = []
    k = face.dim
    for s in simplices:
        verts = np.array(s, dtype=float)
        for combo in _compositions(resolution, k + 1):
            w = np.array(combo, dtype=float) / resolution
            pts.append(w @ verts)
    return np.array(pts)


def _compositions(total: int, parts: int):
    """Tuples of ``parts`` positive integers summing to ``total``."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# piecewise-linear convex functions


@dataclass(frozen=True)
class AffineFn:
    gradient: Tuple[Fraction, ...]
    constant: Fraction

    @classmethod
    def make(cls, gradient, constant=0) -> "AffineFn":
        return cls(tuple(as_fraction(x) for x in gradient), as_fraction(constant))

    def __call__(self, z):
        if _is_exact(z):
            return sum((a * x for a, x in zip(self.gradient, z)), Fraction(0)) + self.constant
        return float(np.dot([float(a) for a in self.gradient], z)) + float(self.constant)

    def as_poly(self) -> MultiPoly:
        return MultiPoly.affine(self.gradient, self.constant)

    def __sub__(self, other: "AffineFn") -> Constraint:
        return (
            tuple(a - b for a, b in zip(self.gradient, other.gradient)),
            self.constant - other.constant,
        )


@dataclass(frozen=True)
class PLConvexFunction:
    """``z -> max_k piece_k(z)``."""

    pieces: Tuple[AffineFn, ...]

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a PL function needs at least one piece")

    @classmethod
    def of(cls, pieces: Sequence) -> "PLConvexFunction":
        out = []
        for p in pieces:
            if not isinstance(p, AffineFn):
                grad, const = p
                p = AffineFn.make(grad, const)
            if p not in out:
                out.append(p)
        return cls(tuple(out))

    @classmethod
    def crease(cls, u: Sequence[int], t) -> "PLConvexFunction":
        """``max(0, <u,z> - t)``."""
        ell = len(u)
        return cls.of([AffineFn.make([0] * ell, 0), AffineFn.make(u, -as_fraction(t))])

    @property
    def nvars(self) -> int:
        return len(self.pieces[0].gradient)

    def __call__(self, z):
        return pl_evaluate(self, z)

    def cells(self, P: DelzantPolytope, restrict_to: Optional[int] = None):
        """``(piece, Cell)`` for the region of ``P`` (or of facet ``restrict_to``)
        where each piece attains the max."""
        eqs = [] if restrict_to is None else [P.halfspaces[restrict_to]]
        out = []
        for k, pk in enumerate(self.pieces):
            cons = list(P.halfspaces) + [pk - pj for j, pj in enumerate(self.pieces) if j != k]
            out.append((pk, Cell(P.dim_l, cons, eqs)))
        return out

    def creases(self, P: DelzantPolytope):
        """Interior walls as ``(u, multiplicity, wall Cell)`` where the jump of
        the gradient across the wall is ``multiplicity * u`` with ``u``
        primitive; only walls of codimension one are returned."""
        out = []
        n = len(self.pieces)
        for k in range(n):
            for j in range(k + 1, n):
                pk, pj = self.pieces[k], self.pieces[j]
                jump, _ = pk - pj
                if not any(jump):
                    continue
                cons = list(P.halfspaces)
                cons += [pk - pi for i, pi in enumerate(self.pieces) if i != k]
                cons += [pj - pi for i, pi in enumerate(self.pieces) if i != j]
                wall = Cell(P.dim_l, cons, [pk - pj])
                if wall.dim != P.dim_l - 1:
                    continue
                u = primitive(jump)
                mult = next(a / b for a, b in zip(jump, u) if b)
                out.append((u, mult, wall))
        return out


def crease(u: Sequence[int], t) -> PLConvexFunction:
    return PLConvexFunction.crease(u, t)


def pl_evaluate(f: PLConvexFunction, z):
    return max(p(z) for p in f.pieces)
