"""Inverse-Hessian matrices H, their boundary/positivity/integrability checks,
and the scalar-curvature and extremal operators built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from .calabi import FibrationData
from .extremal import solve_extremal_affine
from .poly import MultiPoly, RatFunc
from .polytope import DelzantPolytope, sample_face


class PointOnBoundary(ValueError):
    pass


class SingularH(ArithmeticError):
    def __init__(self, z):
        super().__init__(f"H is singular at {tuple(np.round(z, 12))}")
        self.z = z


# matrix fields


@dataclass(frozen=True)
class HMatrix:
    """Symmetric ``S^2 t^*``-valued function on the polytope.

    Either ``entries`` holds exact rational functions (polynomials, possibly
    over a fixed denominator) or ``evaluator`` maps an ``(m, l)`` point array
    to an ``(m, l, l)`` array and derivatives are taken numerically.
    """

    nvars: int
    entries: Optional[Tuple[Tuple[RatFunc, ...], ...]] = None
    evaluator: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    @classmethod
    def exact(cls, rows) -> "HMatrix":
        n = len(rows)
        ents = tuple(tuple(RatFunc.lift(x, n) for x in row) for row in rows)
        for r in range(n):
            if len(ents[r]) != n:
                raise ValueError("H must be square")
            for s in range(r):
                if not ents[r][s] == ents[s][r]:
                    raise ValueError(f"H is not symmetric in entries ({r},{s})")
        return cls(n, ents)

    @classmethod
    def numeric(cls, nvars: int, fn: Callable[[np.ndarray], np.ndarray]) -> "HMatrix":
        return cls(nvars, None, fn)

    @classmethod
    def fubini_study(cls, ell: int) -> "HMatrix":
        """``2 (z_r delta_rs - z_r z_s)``: the Guillemin H of the standard simplex."""
        z = [MultiPoly.var(ell, i) for i in range(ell)]
        rows = [[2 * ((z[r] if r == s else 0) - z[r] * z[s]) for s in range(ell)] for r in range(ell)]
        return cls.exact(rows)

    @property
    def is_exact(self) -> bool:
        return self.entries is not None

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_exact:
            out = np.empty((len(pts), self.nvars, self.nvars))
            for r in range(self.nvars):
                for s in range(r, self.nvars):
                    out[:, r, s] = out[:, s, r] = self.entries[r][s].evaluate_many(pts)
            return out
        return np.asarray(self.evaluator(pts), dtype=float)

    def scaled(self, k) -> "HMatrix":
        if self.is_exact:
            return HMatrix.exact([[e * k for e in row] for row in self.entries])
        fn = self.evaluator
        return HMatrix.numeric(self.nvars, lambda pts: float(k) * fn(pts))

    def __neg__(self):
        return self.scaled(-1)

    def pair(self, u, v=None) -> RatFunc:
        """``H(u, v)`` as a rational function (exact path only)."""
        v = u if v is None else v
        out = RatFunc.lift(0, self.nvars)
        for r in range(self.nvars):
            for s in range(self.nvars):
                if u[r] and v[s]:
                    out = out + self.entries[r][s] * (Fraction(u[r]) * Fraction(v[s]))
        return out

    def inverse(self) -> List[List[RatFunc]]:
        """``G = H^{-1}`` exactly via the adjugate (l <= 3)."""
        return _rat_inverse([list(row) for row in self.entries])


def _rat_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = RatFunc.lift(0, m[0][0].nvars)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _rat_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _rat_inverse(m):
    n = len(m)
    det = _rat_det(m)
    if det.is_zero():
        raise SingularH(None)
    if n == 1:
        return [[1 / det]]
    inv = [[None] * n for _ in range(n)]
    for r in range(n):
        for s in range(n):
            minor = [row[:r] + row[r + 1:] for k, row in enumerate(m) if k != s]
            cof = _rat_det(minor)
            inv[r][s] = (cof if (r + s) % 2 == 0 else -cof) / det
    return inv


# symplectic potentials


@dataclass(frozen=True)
class SymplecticPotential:
    """``U = U_0 + t * phi`` with the Guillemin potential
    ``U_0 = 1/2 sum_i L_i log L_i``, ``L_i = <u_i,z> + c_i``, and an optional
    polynomial perturbation ``phi``."""

    polytope: DelzantPolytope
    perturbation: Optional[MultiPoly] = None
    t: Fraction = Fraction(0)

    def with_t(self, t) -> "SymplecticPotential":
        return SymplecticPotential(self.polytope, self.perturbation, Fraction(t))

    def _affines(self, pts):
        U = np.array(self.polytope.normals, dtype=float)
        c = np.array([float(c) for _, c in self.polytope.halfspaces])
        return pts @ U.T + c

    def value(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        L = self._affines(pts)
        safe = np.where(L > 0, L, 1.0)
        out = 0.5 * np.sum(np.where(L > 0, L * np.log(safe), 0.0), axis=1)
        if self.perturbation is not None and self.t:
            out = out + float(self.t) * self.perturbation.evaluate_many(pts)
        return out

    def hessian(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        L = self._affines(pts)
        if np.any(L <= 0):
            bad = pts[np.argmax(np.any(L <= 0, axis=1))]
            raise PointOnBoundary(f"point {tuple(bad)} is not interior")
        U = np.array(self.polytope.normals, dtype=float)
        out = 0.5 * np.einsum("mi,ir,is->mrs", 1.0 / L, U, U)
        if self.perturbation is not None and self.t:
            ell = self.polytope.dim_l
            for r in range(ell):
                for s in range(ell):
                    out[:, r, s] += float(self.t) * self.perturbation.diff(r).diff(s).evaluate_many(pts)
        return out

    def hessian_exact(self) -> List[List[RatFunc]]:
        """Entries over the common denominator ``prod_i L_i``."""
        P = self.polytope
        ell = P.dim_l
        L = [P.affine(i) for i in range(P.n_facets)]
        prod = MultiPoly.constant(ell, 1)
        for Li in L:
            prod = prod * Li
        nums = [[MultiPoly.constant(ell, 0) for _ in range(ell)] for _ in range(ell)]
        for i, (u, _) in enumerate(P.halfspaces):
            others = MultiPoly.constant(ell, 1)
            for k, Lk in enumerate(L):
                if k != i:
                    others = others * Lk
            for r in range(ell):
                for s in range(ell):
                    if u[r] * u[s]:
                        nums[r][s] = nums[r][s] + others * Fraction(u[r] * u[s], 2)
        if self.perturbation is not None and self.t:
            for r in range(ell):
                for s in range(ell):
                    nums[r][s] = nums[r][s] + prod * self.perturbation.diff(r).diff(s) * self.t
        return [[RatFunc(nums[r][s], prod) for s in range(ell)] for r in range(ell)]

    def h_matrix(self) -> HMatrix:
        """Exact ``(Hess U)^{-1}``, reduced by the facet affine functions."""
        P = self.polytope
        L = [P.affine(i) for i in range(P.n_facets)]
        inv = _rat_inverse(self.hessian_exact())
        return HMatrix.exact([[e.cancel(L) for e in row] for row in inv])


def guillemin_h(P: DelzantPolytope, z) -> np.ndarray:
    """``(Hess U_0)^{-1}`` at an interior point, inverted numerically."""
    hess = SymplecticPotential(P).hessian(np.asarray(z, dtype=float))[0]
    return np.linalg.inv(hess)


def guillemin_hmatrix(P: DelzantPolytope) -> HMatrix:
    pot = SymplecticPotential(P)
    return HMatrix.numeric(P.dim_l, lambda pts: np.linalg.inv(pot.hessian(pts)))


# numeric derivatives


def _fd_step(P: DelzantPolytope) -> float:
    return 1e-3 * P.diameter


def _second_partials(fn: Callable, z: np.ndarray, h: float) -> np.ndarray:
    """Richardson-extrapolated central second differences of a scalar field."""
    ell = len(z)
    eye = np.eye(ell)

    def raw(step):
        out = np.empty((ell, ell))
        f0 = fn(z)
        for r in range(ell):
            er = step * eye[r]
            out[r, r] = (fn(z + er) - 2 * f0 + fn(z - er)) / step**2
            for s in range(r + 1, ell):
                es = step * eye[s]
                out[r, s] = out[s, r] = (
                    fn(z + er + es) - fn(z + er - es) - fn(z - er + es) + fn(z - er - es)
                ) / (4 * step**2)
        return out

    return (4 * raw(h / 2) - raw(h)) / 3


def _grad(fn: Callable, z: np.ndarray, h: float) -> np.ndarray:
    eye = np.eye(len(z))
    return np.array([(fn(z + h * e) - fn(z - h * e)) / (2 * h) for e in eye])


def _safe_step(P: DelzantPolytope, z: np.ndarray) -> float:
    d = P.distance_to_boundary(z)
    if d <= 0:
        raise PointOnBoundary(f"point {tuple(z)} is not interior")
    # each coordinate step moves <u,z> by at most |u|_1 * step
    umax = max(sum(abs(x) for x in u) for u in P.normals)
    return min(_fd_step(P), 0.5 * d / umax)


# operators


def double_divergence(H: HMatrix, weight: MultiPoly) -> RatFunc:
    """``sum_{r,s} d^2 (p H_rs) / dz_r dz_s`` exactly.

    When all entries share one denominator ``D`` the result is assembled over
    ``D^3`` directly, which keeps the numerator small.
    """
    dens = [e.den for row in H.entries for e in row if not e.is_zero()]
    D = dens[0] if dens else None
    if D is not None and not D.is_constant() and all(d == D for d in dens):
        total = MultiPoly.constant(H.nvars, 0)
        for r in range(H.nvars):
            for s in range(H.nvars):
                g = H.entries[r][s].num * weight
                if g.is_zero():
                    continue
                Dr, Ds = D.diff(r), D.diff(s)
                total = total + (
                    g.diff(r).diff(s) * D * D
                    - (g.diff(r) * Ds + g.diff(s) * Dr) * D
                    + g * (2 * Dr * Ds - D * D.diff(r).diff(s))
                )
        return RatFunc(total, D * D * D)
    out = RatFunc.lift(0, H.nvars)
    for r in range(H.nvars):
        for s in range(H.nvars):
            out = out + (H.entries[r][s] * weight).diff(r).diff(s)
    return out


def abreu_scalar(H: HMatrix, F: FibrationData):
    """``Scal = sum_j Scal_j/(<p_j,z>+c_j) - (1/p) sum d^2(p H_rs)/dz_r dz_s``.

    Exact RatFunc for an exact H; otherwise a pointwise evaluator using
    finite differences, which raises PointOnBoundary off the interior.
    """
    if H.is_exact:
        return F.base_scal() - double_divergence(H, F.weight) / F.weight
    P = F.polytope
    base = F.base_scal()
    w = F.weight

    def scal(z):
        z = np.asarray(z, dtype=float)
        h = _safe_step(P, z)
        dd = 0.0
        for r in range(H.nvars):
            for s in range(H.nvars):
                fn = lambda x, r=r, s=s: float(w(x)) * float(H(x)[0, r, s])
                if r == s:
                    dd += _second_partials(fn, z, h)[r, r]
                else:
                    dd += _second_partials(fn, z, h)[r, s]
        return float(base(tuple(z))) - dd / float(w(tuple(z)))

    return scal


def p_lambda(H: HMatrix, F: FibrationData):
    """``<A,z> + B + Scal(H)``; the zero function iff H solves the extremal
    equation."""
    ext = solve_extremal_affine(F)
    scal = abreu_scalar(H, F)
    if H.is_exact:
        return scal + ext.as_poly()
    return lambda z: float(ext(np.asarray(z, dtype=float))) + scal(z)


# checks


@dataclass
class FacetBoundary:
    index: int
    normal: Tuple[int, ...]
    exact: Optional[bool]
    kernel_violation: float
    derivative_violation: float


@dataclass
class BoundaryReport:
    facets: List[FacetBoundary]
    tol: float

    @property
    def passed(self) -> bool:
        return all(
            f.exact if f.exact is not None
            else max(f.kernel_violation, f.derivative_violation) <= self.tol
            for f in self.facets
        )

    def to_dict(self):
        return {
            "passed": bool(self.passed),
            "tol": self.tol,
            "facets": [
                {
                    "index": f.index,
                    "normal": list(f.normal),
                    "exact_pass": f.exact,
                    "max_kernel_violation": f.kernel_violation,
                    "max_derivative_violation": f.derivative_violation,
                }
                for f in self.facets
            ],
        }


def _vanishes_on(q: RatFunc, L: MultiPoly) -> bool:
    """Exact test that ``q`` vanishes on the hyperplane ``L = 0`` (the
    denominator must not vanish identically there)."""
    if q.is_zero():
        return True
    return q.num.exact_div(L) is not None


def boundary_conditions(H: HMatrix, P: DelzantPolytope, i: int):
    """Residual rational functions ``H(u_i, .)`` and ``dH(u_i,u_i) - 2 u_i``."""
    u, _ = P.halfspaces[i]
    ell = P.dim_l
    kernel = []
    for s in range(ell):
        e = [0] * ell
        e[s] = 1
        kernel.append(H.pair(u, e))
    uu = H.pair(u)
    deriv = [uu.diff(t) - 2 * u[t] for t in range(ell)]
    return kernel, deriv


def boundary_check(H: HMatrix, P: DelzantPolytope, tol: float = 1e-6, resolution: int = 20) -> BoundaryReport:
    out = []
    for i in range(P.n_facets):
        face = P.facet(i)
        pts = sample_face(P, face, resolution) if P.dim_l > 1 else np.array(face.vertices, dtype=float)
        u = np.array(P.halfspaces[i][0], dtype=float)
        if H.is_exact:
            kernel, deriv = boundary_conditions(H, P, i)
            L = P.affine(i)
            ok = all(_vanishes_on(q, L) for q in kernel + deriv)
            kv = max(float(np.max(np.abs(q.evaluate_many(pts)))) for q in kernel)
            dv = max(float(np.max(np.abs(q.evaluate_many(pts)))) for q in deriv)
            out.append(FacetBoundary(i, tuple(P.halfspaces[i][0]), ok, kv, dv))
        else:
            # numeric H may be undefined on the boundary: probe just inside and
            # extrapolate back to the facet
            inward = u / float(u @ u)
            delta = 1e-7 * P.diameter
            d = 1e-4 * P.diameter
            h = 0.25 * d / float(np.max(np.abs(u)))
            huu = lambda x: float(u @ H(x)[0] @ u)
            kv = dv = 0.0
            for z in pts:
                near = 2 * H(z + delta * inward)[0] - H(z + 2 * delta * inward)[0]
                kv = max(kv, float(np.max(np.abs(near @ u))))
                g1, g2, g3 = (_grad(huu, z + k * d * inward, h) for k in (1, 2, 3))
                grad = 3 * g1 - 3 * g2 + g3  # quadratic extrapolation to the facet
                dv = max(dv, float(np.max(np.abs(grad - 2 * u))))
            out.append(FacetBoundary(i, tuple(P.halfspaces[i][0]), None, kv, dv))
    return BoundaryReport(out, tol)


@dataclass
class FacePositivity:
    active: Tuple[int, ...]
    dim: int
    n_points: int
    min_eigenvalue: float
    argmin: Tuple[float, ...]
    kernel_residual: float
    first_negative: Optional[Tuple[float, ...]] = None


@dataclass
class PositivityReport:
    faces: List[FacePositivity]
    resolution: int
    margin: float

    @property
    def min_eigenvalue(self) -> float:
        return min(f.min_eigenvalue for f in self.faces)

    @property
    def positive(self) -> bool:
        return all(f.min_eigenvalue > self.margin for f in self.faces)

    @property
    def first_negative(self):
        for f in self.faces:
            if f.first_negative is not None:
                return f.first_negative
        return None

    def to_dict(self):
        return {
            "positive": bool(self.positive),
            "resolution": self.resolution,
            "margin": self.margin,
            "min_eigenvalue": self.min_eigenvalue,
            "faces": [
                {
                    "active_facets": list(f.active),
                    "dim": f.dim,
                    "n_points": f.n_points,
                    "min_eigenvalue": f.min_eigenvalue,
                    "argmin": list(f.argmin),
                    "kernel_residual": f.kernel_residual,
                }
                for f in self.faces
            ],
        }


def face_positivity(H: HMatrix, P: DelzantPolytope, resolution: int = 50, margin: float = 0.0) -> PositivityReport:
    """Sample every face of positive dimension (Delta included) and check that
    H descends to a positive definite form on ``(t/t_F)^*``.

    The quotient form is H restricted to the orthogonal complement of the
    normals of the facets containing F; the kernel residual records
    ``max |H u_i|`` for those normals. This is a sampling certificate.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    out = []
    for face in P.faces:
        if face.dim == 0:
            continue
        pts = sample_face(P, face, resolution)
        Hs = H(pts)
        normals = np.array([P.halfspaces[i][0] for i in face.active], dtype=float).reshape(-1, P.dim_l)
        W = null_space(normals) if len(face.active) else np.eye(P.dim_l)
        Q = np.einsum("ra,mrs,sb->mab", W, Hs, W)
        eig = np.linalg.eigvalsh(Q)[:, 0]
        k = int(np.argmin(eig))
        kernel = float(np.max(np.abs(np.einsum("mrs,is->mir", Hs, normals)))) if len(face.active) else 0.0
        neg = np.nonzero(eig <= 0)[0]
        first_neg = tuple(map(float, pts[neg[0]])) if len(neg) else None
        out.append(
            FacePositivity(face.active, face.dim, len(pts), float(eig[k]), tuple(map(float, pts[k])), kernel, first_neg)
        )
    return PositivityReport(out, resolution, margin)


@dataclass
class IntegrabilityReport:
    exact_zero: Optional[bool]
    max_residual: float
    tol: float
    n_points: int

    @property
    def integrable(self) -> bool:
        return self.exact_zero if self.exact_zero is not None else self.max_residual <= self.tol

    def to_dict(self):
        return {
            "integrable": bool(self.integrable),
            "exact_zero": self.exact_zero,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "n_points": self.n_points,
        }


def integrability_residuals(H: HMatrix) -> List[RatFunc]:
    """``dG_rs/dz_t - dG_rt/dz_s`` for ``G = H^{-1}``, ``s < t``."""
    G = H.inverse()
    ell = H.nvars
    out = []
    for r in range(ell):
        for s in range(ell):
            for t in range(s + 1, ell):
                out.append(G[r][s].diff(t) - G[r][t].diff(s))
    return out


def integrability_check(H: HMatrix, P: DelzantPolytope, tol: float = 1e-8, resolution: int = 20) -> IntegrabilityReport:
    """Is ``H^{-1}`` a Hessian on the interior? Exact for rational H."""
    pts = sample_face(P, P.faces[0], resolution)
    ell = P.dim_l
    if ell == 1:
        return IntegrabilityReport(True if H.is_exact else None, 0.0, tol, len(pts))
    if H.is_exact:
        res = integrability_residuals(H)
        exact = all(q.is_zero() for q in res)
        vals = [float(np.max(np.abs(q.evaluate_many(pts)))) for q in res]
        return IntegrabilityReport(exact, max(vals), tol, len(pts))
    worst = 0.0
    for z in pts:
        Gz = _checked_inverse(H(z)[0], z)
        h = _safe_step(P, z)
        dH = np.empty((ell, ell, ell))
        for t in range(ell):
            e = np.zeros(ell)
            e[t] = 1.0
            central = lambda k: (H(z + k * e)[0] - H(z - k * e)[0]) / (2 * k)
            dH[t] = (4 * central(h / 2) - central(h)) / 3
        dG = np.array([-Gz @ dH[t] @ Gz for t in range(ell)])  # dG[t][r][s]
        for r in range(ell):
            for s in range(ell):
                for t in range(s + 1, ell):
                    worst = max(worst, abs(dG[t, r, s] - dG[s, r, t]))
    return IntegrabilityReport(None, float(worst), tol, len(pts))


def _checked_inverse(M: np.ndarray, z) -> np.ndarray:
    if abs(np.linalg.det(M)) < 1e-300 or np.linalg.cond(M) > 1e14:
        raise SingularH(z)
    return np.linalg.inv(M)
