"""Adaptive simplex quadrature on polytopes.

Grundmann-Moeller rules of two consecutive orders give an embedded error
estimate on every simplex; the simplex with the largest estimate is bisected
along its longest edge until the summed estimate drops below ``tol``. The
rules are open (no nodes on the boundary), so integrable boundary
singularities such as ``log z`` are handled by repeated subdivision towards
the boundary.

That subdivision converges only linearly in the cell size along a
logarithmic boundary layer in dimension >= 2. The ``cone`` method instead
splits every face into cones from its barycenter down to the edges and uses
tanh-sinh rules in the radial coordinates, so all boundary singularities sit
at endpoints; its error estimate compares two consecutive step halvings.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from itertools import count
from math import ceil, factorial, fsum, pi
from typing import Callable, Optional, Sequence

import numpy as np

from .polytope import DelzantPolytope, Face


class NoConvergence(RuntimeError):
    def __init__(self, result: "QuadResult"):
        super().__init__(
            f"quadrature budget exhausted: estimate {result.value!r} "
            f"with error bound {result.error:.3e}"
        )
        self.result = result


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    evaluations: int


def _multi_indices(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _multi_indices(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def grundmann_moeller(n: int, s: int):
    """Barycentric nodes ``(m, n+1)`` and weights of the degree ``2s+1`` rule,
    normalized so the weights sum to 1 (i.e. a mean over the simplex)."""
    d = 2 * s + 1
    nodes, weights = [], []
    for i in range(s + 1):
        w = (-1) ** i * 2.0 ** (-2 * s) * (d + n - 2 * i) ** d
        w /= factorial(i) * factorial(d + n - i)
        for beta in _multi_indices(s - i, n + 1):
            nodes.append([(2 * b + 1) / (d + n - 2 * i) for b in beta])
            weights.append(w)
    weights = np.array(weights) * factorial(n)
    return np.array(nodes), weights


def _simplex_rule(f, verts: np.ndarray, measure: float, s: int):
    n = len(verts) - 1
    hi_nodes, hi_w = grundmann_moeller(n, s)
    lo_nodes, lo_w = grundmann_moeller(n, s - 1)
    hi = measure * float(hi_w @ f(hi_nodes @ verts))
    lo = measure * float(lo_w @ f(lo_nodes @ verts))
    return hi, abs(hi - lo), len(hi_w) + len(lo_w)


def _bisect(verts: np.ndarray):
    n = len(verts)
    best, pair = -1.0, (0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.sum((verts[i] - verts[j]) ** 2))
            if d > best:
                best, pair = d, (i, j)
    i, j = pair
    mid = 0.5 * (verts[i] + verts[j])
    a, b = verts.copy(), verts.copy()
    a[j] = mid
    b[i] = mid
    return a, b


def integrate_simplices(
    f: Callable[[np.ndarray], np.ndarray],
    simplices: Sequence[np.ndarray],
    measures: Sequence[float],
    tol: float,
    max_evals: int = 2_000_000,
    order: int = 4,
) -> QuadResult:
    """Adaptive integral of a vectorized ``f`` over a union of simplices.

    ``measures[k]`` is the measure of simplex ``k`` (vertex array ``(k+1, ell)``);
    it is split evenly on bisection. A 0-simplex contributes ``f(v) * measure``.
    """
    heap = []
    tick = count()
    total_val = 0.0
    total_err = 0.0
    point_val = 0.0
    evals = 0
    for verts, meas in zip(simplices, measures):
        verts = np.asarray(verts, dtype=float)
        if len(verts) == 1:
            point_val += meas * float(f(verts)[0])
            evals += 1
            continue
        val, err, n = _simplex_rule(f, verts, meas, order)
        evals += n
        total_val += val
        total_err += err
        heapq.heappush(heap, (-err, next(tick), verts, meas, val))
    while heap and total_err > tol:
        if evals >= max_evals:
            return QuadResult(point_val + total_val, total_err, False, evals)
        neg_err, _, verts, meas, val = heapq.heappop(heap)
        total_val -= val
        total_err += neg_err
        for child in _bisect(verts):
            cval, cerr, n = _simplex_rule(f, child, meas / 2, order)
            evals += n
            total_val += cval
            total_err += cerr
            heapq.heappush(heap, (-cerr, next(tick), child, meas / 2, cval))
    # the running sums drift; recompute from the leaves
    if heap:
        total_err = sum(-item[0] for item in heap)
        total_val = fsum(item[4] for item in heap)
    return QuadResult(point_val + total_val, total_err, total_err <= tol, evals)


def full_measure(simplex) -> float:
    v = np.asarray(simplex, dtype=float)
    n = len(v) - 1
    return abs(float(np.linalg.det((v[1:] - v[0]).T))) / factorial(n)


def facet_measure(simplex, normal) -> float:
    v = np.asarray(simplex, dtype=float)
    u = np.asarray(normal, dtype=float)
    k = len(v) - 1
    mat = np.vstack([u / float(u @ u)] + [row for row in (v[1:] - v[0])])
    return abs(float(np.linalg.det(mat))) / factorial(k)


def quadrature(
    P: DelzantPolytope,
    f: Callable,
    tol: float = 1e-10,
    vectorized: bool = True,
    max_evals: int = 2_000_000,
    allow_partial: bool = False,
    method: str = "simplex",
) -> QuadResult:
    """Numerical ``int_Delta f dv`` with estimated absolute error at most ``tol``.

    ``method`` is ``"simplex"`` (adaptive bisection) or ``"cone"`` (tanh-sinh
    on barycentric cones, for integrands singular along the boundary).
    Raises NoConvergence (carrying the best estimate) when the evaluation
    budget runs out, unless ``allow_partial``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    g = f if vectorized else _vectorize(f)
    if method == "cone":
        res = _cone_integrate(g, P, [(P.faces[0], 1.0)], tol, max_evals)
        if not res.converged and not allow_partial:
            raise NoConvergence(res)
        return res
    if method != "simplex":
        raise ValueError(f"unknown method {method!r}")
    simplices = [np.array(s, dtype=float) for s in P.simplices]
    res = integrate_simplices(g, simplices, [full_measure(s) for s in simplices], tol, max_evals)
    if not res.converged and not allow_partial:
        raise NoConvergence(res)
    return res


def boundary_quadrature(
    P: DelzantPolytope,
    f: Callable,
    tol: float = 1e-10,
    facets: Optional[Sequence[int]] = None,
    vectorized: bool = True,
    max_evals: int = 2_000_000,
    allow_partial: bool = False,
    method: str = "simplex",
) -> QuadResult:
    """Numerical ``int f dsigma`` over the selected facets."""
    g = f if vectorized else _vectorize(f)
    if method == "cone":
        idx = range(P.n_facets) if facets is None else facets
        parts = [(P.facet(i), 1.0 / float(np.linalg.norm(P.halfspaces[i][0]))) for i in idx]
        res = _cone_integrate(g, P, parts, tol, max_evals)
        if not res.converged and not allow_partial:
            raise NoConvergence(res)
        return res
    if method != "simplex":
        raise ValueError(f"unknown method {method!r}")
    simplices, measures = [], []
    for i in range(P.n_facets) if facets is None else facets:
        u = P.halfspaces[i][0]
        for s in P.facet_simplices[i]:
            simplices.append(np.array(s, dtype=float))
            measures.append(facet_measure(s, u))
    res = integrate_simplices(g, simplices, measures, tol, max_evals)
    if not res.converged and not allow_partial:
        raise NoConvergence(res)
    return res


# tanh-sinh on barycentric cones

_T_MAX = 3.0  # 1 - x stays above ~2e-14, so nodes never round onto a face


@lru_cache(maxsize=None)
def tanh_sinh(level: int):
    """Nodes on (0, 1) as ``(x, 1 - x)`` and weights for step ``2**-level``."""
    h = 2.0 ** -level
    k = ceil(_T_MAX / h)
    t = np.arange(-k, k + 1) * h
    a = 0.5 * pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-2 * a))
    xc = 1.0 / (1.0 + np.exp(2 * a))
    w = h * 0.5 * pi * np.cosh(t) / (2.0 * np.cosh(a) ** 2)
    return x, xc, w


def _subfaces(P: DelzantPolytope, face: Face):
    verts = set(face.vertices)
    return [g for g in P.faces if g.dim == face.dim - 1 and set(g.vertices) <= verts]


def _height(b: np.ndarray, base: Face) -> float:
    y = np.array(base.vertices, dtype=float)
    d = b - y[0]
    if len(y) > 1:
        E = (y[1:] - y[0]).T
        coef, *_ = np.linalg.lstsq(E, d, rcond=None)
        d = d - E @ coef
    return float(np.linalg.norm(d))


@lru_cache(maxsize=64)
def cone_rule(P: DelzantPolytope, face_index: int, level: int):
    """Nodes and Euclidean-volume weights on ``P.faces[face_index]``."""
    return _cone_rule(P, P.faces[face_index], level)


def _cone_rule(P: DelzantPolytope, face: Face, level: int):
    if face.dim == 0:
        return np.array(face.vertices, dtype=float), np.ones(1)
    b = np.mean(np.array(face.vertices, dtype=float), axis=0)
    s, sc, w = tanh_sinh(level)
    pts, wts = [], []
    for g in _subfaces(P, face):
        Y, Wy = cone_rule(P, P.faces.index(g), level)
        h = _height(b, g)
        # b + s (y - b) written from the base side keeps the distance to it exact
        pts.append((Y[None, :, :] + sc[:, None, None] * (b - Y)[None, :, :]).reshape(-1, P.dim_l))
        wts.append((h * (s ** (face.dim - 1) * w)[:, None] * Wy[None, :]).ravel())
    return np.concatenate(pts), np.concatenate(wts)


def _cone_integrate(f, P: DelzantPolytope, parts, tol: float, max_evals: int,
                    start: int = 3, max_level: int = 8) -> QuadResult:
    """Integrate over ``(face, scale)`` parts, halving the tanh-sinh step until
    two consecutive levels agree to ``tol``."""
    evals = 0
    values = []
    for level in range(start, max_level + 1):
        rules = [(cone_rule(P, P.faces.index(face), level), scale) for face, scale in parts]
        n = sum(len(r[0][1]) for r in rules)
        if evals + n > max_evals:
            break
        values.append(fsum(scale * fsum(W * f(X)) for (X, W), scale in rules))
        evals += n
        if len(values) > 1 and abs(values[-1] - values[-2]) <= tol:
            return QuadResult(values[-1], abs(values[-1] - values[-2]), True, evals)
    if not values:
        return QuadResult(float("nan"), float("inf"), False, evals)
    err = abs(values[-1] - values[-2]) if len(values) > 1 else float("inf")
    return QuadResult(values[-1], err, False, evals)


def _vectorize(f):
    def g(points):
        return np.array([f(p) for p in points], dtype=float)

    return g
