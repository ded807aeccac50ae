"""The relative stability functional, its form through an extremal H, the
relative K-energy, and crease-probe scans for non-existence."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .abreu import HMatrix, SymplecticPotential, abreu_scalar, p_lambda
from .calabi import FibrationData
from .extremal import solve_extremal_affine
from .poly import MultiPoly, RatFunc, as_fraction
from .polytope import PLConvexFunction, boundary_moment, crease, moment, sample_face, simplex_integral
from .quadrature import (
    NoConvergence,
    boundary_quadrature,
    facet_measure,
    full_measure,
    integrate_simplices,
    quadrature,
)

TestFunction = Union[MultiPoly, PLConvexFunction]


class NotExtremalSolution(ValueError):
    pass


class NotConvex(ValueError):
    def __init__(self, z):
        super().__init__(f"Hess U is not positive definite at {tuple(np.round(z, 12))}")
        self.z = z


def interior_density(F: FibrationData) -> MultiPoly:
    """``(<A,z> + B + sum_j Scal_j/(<p_j,z>+c_j)) p(z)`` as a polynomial."""
    ext = solve_extremal_affine(F)
    return ext.as_poly() * F.weight + F.base_scal_times_weight


def futaki_F(F: FibrationData, f: TestFunction) -> Fraction:
    """Exact value of the relative stability functional on a polynomial or a
    rational PL function (split along the creases into cells)."""
    P = F.polytope
    w = F.weight
    dens = interior_density(F)
    half = Fraction(1, 2)
    if isinstance(f, MultiPoly):
        return boundary_moment(P, f * w) + half * moment(P, f * dens)
    total = Fraction(0)
    for piece, cell in f.cells(P):
        total += half * cell.integrate(piece.as_poly() * dens)
    for i in range(P.n_facets):
        u = P.halfspaces[i][0]
        for piece, cell in f.cells(P, restrict_to=i):
            total += cell.integrate(piece.as_poly() * w, normal=u)
    return total


def _check_extremal(H: HMatrix, F: FibrationData, tol: float) -> None:
    pl = p_lambda(H, F)
    if H.is_exact:
        if not pl.is_zero():
            raise NotExtremalSolution("P_lambda(H) is not the zero rational function")
        return
    P = F.polytope
    pts = sample_face(P, P.faces[0], 12)
    worst = max(abs(pl(z)) for z in pts)
    if worst > tol:
        raise NotExtremalSolution(f"P_lambda(H) residual {worst:.3e} exceeds {tol:.1e}")


def _integrate_ratfunc(q: RatFunc, simplices, normal, tol: float):
    """Exact when ``q`` is a polynomial; adaptive quadrature otherwise."""
    if q.is_polynomial():
        return sum((simplex_integral(q.as_poly(), s, normal) for s in simplices), Fraction(0))
    arrs = [np.array(s, dtype=float) for s in simplices]
    meas = [full_measure(s) if normal is None else facet_measure(s, normal) for s in simplices]
    res = integrate_simplices(q.evaluate_many, arrs, meas, tol)
    if not res.converged:
        raise NoConvergence(res)
    return res.value


def futaki_via_H(F: FibrationData, H: HMatrix, f: TestFunction, tol: float = 1e-10):
    """``(1/2) int <H, Hess f> p dv``; for PL ``f`` the distributional version
    ``(1/2) sum_walls m * int_wall H(u,u) p dsigma_u`` (gradient jump ``m u``).

    Integrating by parts against an extremal H that satisfies the boundary
    conditions gives ``int <H, Hess f> p dv = 2 F(f)`` with ``F`` normalized as
    in ``futaki_F`` (so that ``F(affine) = 0``); the factor 1/2 makes the two
    functions agree.
    """
    if not H.is_exact:
        raise NotImplementedError("futaki_via_H needs an exact H")
    _check_extremal(H, F, tol)
    P = F.polytope
    w = F.weight
    if isinstance(f, MultiPoly):
        q = RatFunc.lift(0, P.dim_l)
        for r in range(P.dim_l):
            for s in range(P.dim_l):
                d2 = f.diff(r).diff(s)
                if not d2.is_zero():
                    q = q + H.entries[r][s] * d2
        return _integrate_ratfunc(q * w, P.simplices, None, tol) / 2
    total = Fraction(0)
    for u, mult, wall in f.creases(P):
        val = _integrate_ratfunc(H.pair(u) * w, wall.simplices, u, tol)
        total = total + mult * val
    return total / 2


# K-energy


@dataclass
class KEnergy:
    value: float
    error: float
    futaki_term: float
    log_term: float
    relative: Optional[float] = None

    def to_dict(self):
        return dict(self.__dict__)


def k_energy(F: FibrationData, U: SymplecticPotential, tol: float = 1e-9, reference: bool = False) -> KEnergy:
    """``E(U) = 2 F(U) - int log det Hess U  p dv`` by tanh-sinh cone quadrature
    (the integrands are logarithmically singular along the boundary).

    With ``reference`` the value relative to the Guillemin potential is
    also filled in.
    """
    P = F.polytope
    w = F.weight
    dens = interior_density(F)
    part = tol / 4

    def interior(pts):
        return dens.evaluate_many(pts) * U.value(pts)

    def boundary(pts):
        return w.evaluate_many(pts) * U.value(pts)

    def logdet(pts):
        hess = U.hessian(pts)
        sign, ld = np.linalg.slogdet(hess)
        if np.any(sign <= 0):
            raise NotConvex(pts[int(np.argmax(sign <= 0))])
        return ld * w.evaluate_many(pts)

    b = boundary_quadrature(P, boundary, part, method="cone")
    i = quadrature(P, interior, part, method="cone")
    lg = quadrature(P, logdet, part, method="cone")
    fut = b.value + 0.5 * i.value
    err = 2 * b.error + i.error + lg.error
    out = KEnergy(2 * fut - lg.value, err, fut, lg.value)
    if reference:
        ref = k_energy(F, SymplecticPotential(P), tol)
        out.relative = out.value - ref.value
    return out


# scans


@dataclass
class Probe:
    normal: Tuple[int, ...]
    t: Fraction
    value: Fraction
    error: float = 0.0

    @property
    def certified_negative(self) -> bool:
        return self.value < 0 and self.error < abs(self.value)


@dataclass
class StabilityVerdict:
    status: str  # "unstable" | "no-violation-found" | "affine-degenerate"
    witness: Optional[Probe]
    probes: List[Probe] = field(default_factory=list)
    inconclusive: List[Probe] = field(default_factory=list)

    def to_dict(self):
        def pdict(p):
            return {
                "normal": list(p.normal),
                "t": str(p.t),
                "value": str(p.value),
                "value_float": float(p.value),
                "error": p.error,
            }

        return {
            "status": self.status,
            "witness": pdict(self.witness) if self.witness else None,
            "n_probes": len(self.probes),
            "n_inconclusive": len(self.inconclusive),
        }


def crease_range(F: FibrationData, u) -> Tuple[Fraction, Fraction]:
    vals = [sum(Fraction(a) * x for a, x in zip(u, v)) for v in F.polytope.vertices]
    return min(vals), max(vals)


def _probe(args):
    F, u, t = args
    return Probe(tuple(u), t, futaki_F(F, crease(u, t)))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TORIC_EXTREMAL_WORKERS", "1")))
    except ValueError:
        return 1


def nonexistence_scan(
    F: FibrationData,
    crease_normals: Sequence[Sequence[int]],
    grid: int = 100,
    tol=0,
) -> StabilityVerdict:
    """Evaluate the functional on ``max(0, <u,z> - t)`` over an interior
    ``t``-grid for each normal. A certified negative value proves that no
    extremal Kähler metric exists in the class; finding none proves nothing.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    tol = as_fraction(tol)
    tasks = []
    for u in crease_normals:
        lo, hi = crease_range(F, u)
        for k in range(1, grid):
            tasks.append((F, tuple(int(x) for x in u), lo + (hi - lo) * Fraction(k, grid)))
    n = _workers()
    if n > 1:
        with ProcessPoolExecutor(n) as pool:
            probes = list(pool.map(_probe, tasks))
    else:
        probes = [_probe(t) for t in tasks]
    # exact evaluation: error bounds are zero, nothing is inconclusive
    negative = [p for p in probes if p.value < -tol and p.certified_negative]
    inconclusive = [p for p in probes if p.value < -tol and not p.certified_negative]
    if negative:
        return StabilityVerdict("unstable", min(negative, key=lambda p: p.value), probes, inconclusive)
    if probes and all(p.value == 0 for p in probes):
        return StabilityVerdict("affine-degenerate", None, probes, inconclusive)
    return StabilityVerdict("no-violation-found", None, probes, inconclusive)


def k_energy_gradient(F: FibrationData, U: SymplecticPotential, phi: MultiPoly, tol: float = 1e-10) -> float:
    """``int Scal_perp(U) * phi * p dv``, the derivative of the K-energy along
    ``phi``, with the exact scalar curvature of ``U``."""
    H = U.h_matrix()
    scal = abreu_scalar(H, F) + solve_extremal_affine(F).as_poly()
    integrand = scal * (phi * F.weight)

    def f(pts):
        return integrand.evaluate_many(pts)

    return quadrature(F.polytope, f, tol, method="cone").value
