"""The extremal affine function <A,z>+B from the exact moment system."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Tuple

from .calabi import FibrationData
from .exact import SingularSystem, solve
from .poly import MultiPoly
from .polytope import AffineFn, boundary_moment, moment


@dataclass(frozen=True)
class MomentSystem:
    alpha: Fraction
    alpha_r: Tuple[Fraction, ...]
    alpha_rs: Tuple[Tuple[Fraction, ...], ...]
    beta: Fraction
    beta_r: Tuple[Fraction, ...]

    def gram(self):
        """Gram matrix of (z_1, ..., z_l, 1) under p dv."""
        ell = len(self.alpha_r)
        rows = [list(self.alpha_rs[r]) + [self.alpha_r[r]] for r in range(ell)]
        rows.append(list(self.alpha_r) + [self.alpha])
        return rows


def build_moment_system(F: FibrationData) -> MomentSystem:
    ell = F.nvars
    P = F.polytope
    w = F.weight
    zs = [MultiPoly.var(ell, r) for r in range(ell)]
    half = Fraction(1, 2)
    interior = F.base_scal_times_weight

    alpha = moment(P, w)
    alpha_r = tuple(moment(P, z * w) for z in zs)
    alpha_rs = tuple(
        tuple(moment(P, zs[r] * zs[s] * w) for s in range(ell)) for r in range(ell)
    )
    beta = boundary_moment(P, w) + half * moment(P, interior)
    beta_r = tuple(boundary_moment(P, z * w) + half * moment(P, z * interior) for z in zs)
    return MomentSystem(alpha, alpha_r, alpha_rs, beta, beta_r)


def solve_moment_system(m: MomentSystem) -> AffineFn:
    """Solve ``sum_s alpha_rs A_s + alpha_r B + 2 beta_r = 0`` and
    ``sum_s alpha_s A_s + alpha B + 2 beta = 0`` exactly."""
    rhs = [-2 * b for b in m.beta_r] + [-2 * m.beta]
    try:
        sol = solve(m.gram(), rhs)
    except SingularSystem as exc:
        raise SingularSystem("moment Gram matrix is singular") from exc
    return AffineFn(tuple(sol[:-1]), sol[-1])


@lru_cache(maxsize=256)
def solve_extremal_affine(F: FibrationData) -> AffineFn:
    return solve_moment_system(build_moment_system(F))


def scal_perp(F: FibrationData, scal: Callable) -> Callable:
    """``z -> <A,z> + B + scal(z)``."""
    ext = solve_extremal_affine(F)

    def perp(z):
        return ext(z) + scal(z)

    return perp
