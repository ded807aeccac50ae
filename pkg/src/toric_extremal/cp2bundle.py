"""Explicit polynomial ansatz on the projectivization of O + L1 + L2 over a
genus-g curve: the fibre is CP^2 with the standard simplex as polytope, and a
single free base factor carries the curve with ``Scal = -C = 4(1 - g)``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .abreu import HMatrix, boundary_check, face_positivity, p_lambda
from .calabi import BaseFactor, FibrationData, make_fibration
from .extremal import solve_extremal_affine
from .poly import MultiPoly, RatFunc, as_fraction
from .polytope import sample_face, standard_simplex
from .report import AnalysisReport, frac_str


@dataclass(frozen=True)
class CP2BundleParams:
    p1: int
    p2: int
    c: Fraction
    C: Fraction
    genus: Optional[int] = None

    @classmethod
    def from_genus(cls, genus: int, p1: int, p2: int, c) -> "CP2BundleParams":
        params = cls(int(p1), int(p2), as_fraction(c), Fraction(4 * (genus - 1)), int(genus))
        params.validate()
        return params

    @classmethod
    def raw(cls, p1, p2, c, C) -> "CP2BundleParams":
        """No admissibility checks (for algebraic experiments)."""
        return cls(int(p1), int(p2), as_fraction(c), as_fraction(C))

    def validate(self) -> None:
        if self.genus is not None and self.genus < 0:
            raise ValueError("genus must be >= 0")
        if not self.p2 > self.p1 >= 1:
            raise ValueError("need p2 > p1 >= 1")
        if self.c <= 0:
            raise ValueError("need c > 0")

    @property
    def admissible(self) -> bool:
        try:
            self.validate()
        except ValueError:
            return False
        return self.C >= -4 and self.C % 4 == 0

    def affine(self) -> MultiPoly:
        return MultiPoly.affine([self.p1, self.p2], self.c)

    def fibration(self) -> FibrationData:
        P = standard_simplex(2)
        return make_fibration(P, [BaseFactor.make(1, -self.C, (self.p1, self.p2), self.c)])

    def to_dict(self):
        return {
            "genus": self.genus,
            "C": frac_str(self.C),
            "p1": self.p1,
            "p2": self.p2,
            "c": frac_str(self.c),
        }


@dataclass(frozen=True)
class AnsatzCoeffs:
    x0: Fraction
    x1: Fraction
    x2: Fraction
    y0: Fraction
    y1: Fraction
    y2: Fraction

    @classmethod
    def zero(cls) -> "AnsatzCoeffs":
        return cls(*(Fraction(0),) * 6)

    @classmethod
    def make(cls, *vals) -> "AnsatzCoeffs":
        return cls(*(as_fraction(v) for v in vals))

    def as_tuple(self):
        return (self.x0, self.x1, self.x2, self.y0, self.y1, self.y2)

    def to_dict(self):
        names = ("x0", "x1", "x2", "y0", "y1", "y2")
        return {k: frac_str(v) for k, v in zip(names, self.as_tuple())}


def v_constants(P: CP2BundleParams) -> Tuple[Fraction, Fraction, Fraction]:
    c, C, p1, p2 = P.c, P.C, Fraction(P.p1), Fraction(P.p2)
    k = -(12 * c + C + 4 * p1 + 4 * p2)
    den = 2 * (
        50 * c**3 + 50 * c**2 * p1 + 13 * c * p1**2 + p1**3 + 50 * c**2 * p2
        + 37 * c * p1 * p2 + 5 * p1**2 * p2 + 13 * c * p2**2 + 5 * p1 * p2**2 + p2**3
    )
    n0 = 5 * c * p1**2 + p1**3 + 5 * c * p1 * p2 + 5 * p1**2 * p2 + 5 * c * p2**2 + 5 * p1 * p2**2 + p2**3
    n1 = 15 * c * p1**2 + 3 * p1**3 - 15 * c * p1 * p2 + 3 * p1**2 * p2 + 5 * c * p2**2 - 3 * p1 * p2**2 + p2**3
    n2 = 5 * c * p1**2 + p1**3 - 15 * c * p1 * p2 - 3 * p1**2 * p2 + 15 * c * p2**2 + 3 * p1 * p2**2 + 3 * p2**3
    return k * n0 / den, k * n1 / den, k * n2 / den


def ansatz_numerators(coeffs: AnsatzCoeffs, P: CP2BundleParams):
    """The quartic numerators ``(P11, P12, P22)`` of ``H = P / (c + p1 z1 + p2 z2)``."""
    z1, z2 = MultiPoly.var(2, 0), MultiPoly.var(2, 1)
    w = 1 - z1 - z2
    D = P.affine()
    x0, x1, x2, y0, y1, y2 = coeffs.as_tuple()
    p11 = 2 * D * z1 * (1 - z1) + z1 * z1 * (x0 * z2 * z2 + x2 * w * w + 2 * y1 * z2 * w)
    p12 = -2 * D * z1 * z2 + z1 * z2 * (y0 * w * w - x0 * z1 * z2 - w * (y1 * z1 + y2 * z2))
    p22 = 2 * D * z2 * (1 - z2) + z2 * z2 * (x0 * z1 * z1 + x1 * w * w + 2 * y2 * z1 * w)
    return p11, p12, p22


def ansatz_H(coeffs: AnsatzCoeffs, P: CP2BundleParams) -> HMatrix:
    p11, p12, p22 = ansatz_numerators(coeffs, P)
    D = P.affine()
    return HMatrix.exact([[RatFunc(p11, D), RatFunc(p12, D)], [RatFunc(p12, D), RatFunc(p22, D)]])


def extremal_residual(coeffs: AnsatzCoeffs, P: CP2BundleParams):
    v0, v1, v2 = v_constants(P)
    x0, x1, x2, y0, y1, y2 = coeffs.as_tuple()
    return (y0 + x1 + x2 - v0, y1 + x0 + x2 - v1, y2 + x0 + x1 - v2)


def lin_int_residual(coeffs: AnsatzCoeffs):
    x0, x1, x2, y0, y1, y2 = coeffs.as_tuple()
    return (x0 - y1 - y2, x1 - y2 - y0, x2 - y0 - y1)


def distinguished_solution(P: CP2BundleParams) -> AnsatzCoeffs:
    """The unique coefficients solving both the extremal and the linear
    integrability equations."""
    v0, v1, v2 = v_constants(P)
    t = Fraction(1, 10)
    return AnsatzCoeffs(
        t * (-2 * v0 + 3 * v1 + 3 * v2),
        t * (3 * v0 - 2 * v1 + 3 * v2),
        t * (3 * v0 + 3 * v1 - 2 * v2),
        t * (4 * v0 - v1 - v2),
        t * (-v0 + 4 * v1 - v2),
        t * (-v0 - v1 + 4 * v2),
    )


def integrability_residual(coeffs: AnsatzCoeffs, P: CP2BundleParams):
    """The two quadratic integrability conditions."""
    p1, p2 = P.p1, P.p2
    _, _, _, y0, y1, y2 = coeffs.as_tuple()
    s1 = 2 * (p2 - p1) * y0 + 2 * p2 * y1 - y0 * y1
    s2 = 2 * (p1 - p2) * y0 + 2 * p1 * y2 - y0 * y2
    return s1, s2


def _integrate_segment(q: MultiPoly, a: Fraction) -> Fraction:
    """``int_0^a q(t, a - t) dt`` exactly."""
    t = MultiPoly.var(1, 0)
    restricted = q.compose([t, MultiPoly.constant(1, a) - t])
    total = Fraction(0)
    for (k,), coef in restricted.terms.items():
        total += coef * a ** (k + 1) / (k + 1)
    return total


def crease_F(P: CP2BundleParams, a, coeffs: Optional[AnsatzCoeffs] = None) -> Fraction:
    """Functional value on the crease along ``z1 + z2 = a``:
    ``int_0^a (H11 + 2 H12 + H22)(t, a-t) (c + p1 t + p2 (a-t)) dt``.
    The affine denominator cancels, so the value is exact. Works at ``c = 0``.

    This is the un-halved rewritten form, i.e. twice ``futaki_F`` of the
    crease function ``max(0, z1 + z2 - a)``; the sign is what matters.
    """
    a = as_fraction(a)
    if not 0 < a < 1:
        raise ValueError("need 0 < a < 1")
    coeffs = distinguished_solution(P) if coeffs is None else coeffs
    p11, p12, p22 = ansatz_numerators(coeffs, P)
    return _integrate_segment(p11 + 2 * p12 + p22, a)


def crease_closed_form_c0(P: CP2BundleParams, a) -> Fraction:
    """The ``c = 0`` value ``(1/6)(1-a) a^3 (-C + 2(p1+p2) + a (C + 4(p1+p2)))``."""
    a = as_fraction(a)
    s = P.p1 + P.p2
    return Fraction(1, 6) * (1 - a) * a**3 * (-P.C + 2 * s + a * (P.C + 4 * s))


def distance_to_fubini_study(P: CP2BundleParams, resolution: int = 30) -> float:
    """Max over a grid of the simplex of ``|H_0 - H_FS|`` (entrywise)."""
    S = standard_simplex(2)
    pts = np.vstack([sample_face(S, f, resolution) for f in S.faces])
    diff = ansatz_H(distinguished_solution(P), P)(pts) - HMatrix.fubini_study(2)(pts)
    return float(np.max(np.abs(diff)))


def crease_scan(P: CP2BundleParams, a_grid: Sequence) -> list:
    return [(as_fraction(a), crease_F(P, a)) for a in a_grid]


def default_a_grid(resolution: int):
    return [Fraction(k, resolution) for k in range(1, resolution)]


def analyze(P: CP2BundleParams, resolution: int = 50, a_grid: Optional[Sequence] = None,
            cross_check: bool = True) -> AnalysisReport:
    """Run every certificate for the distinguished solution and derive verdicts."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    F = P.fibration()
    S = F.polytope
    coeffs = distinguished_solution(P)
    H = ansatz_H(coeffs, P)
    ext = solve_extremal_affine(F)

    bc = boundary_check(H, S)
    res = extremal_residual(coeffs, P)
    lin = lin_int_residual(coeffs)
    s1, s2 = integrability_residual(coeffs, P)
    pos = face_positivity(H, S, resolution)
    grid = default_a_grid(resolution) if a_grid is None else [as_fraction(a) for a in a_grid]
    scan = crease_scan(P, grid)
    negatives = [(a, v) for a, v in scan if v < 0]
    worst = min(scan, key=lambda av: av[1]) if scan else None

    report = AnalysisReport(command="cp2-analyze")
    report.input = {"cp2": P.to_dict(), "resolution": resolution}
    report.computed = {
        "extremal_affine": {"A": [frac_str(x) for x in ext.gradient], "B": frac_str(ext.constant)},
        "v": [frac_str(v) for v in v_constants(P)],
        "coefficients": coeffs.to_dict(),
    }
    report.certificates["boundary"] = bc.to_dict()
    report.certificates["extremal_residual"] = {
        "residual": [frac_str(r) for r in res],
        "zero": all(r == 0 for r in res),
    }
    if cross_check:
        report.certificates["extremal_residual"]["p_lambda_zero"] = p_lambda(H, F).is_zero()
    report.certificates["integrability"] = {
        "lin_int_residual": [frac_str(r) for r in lin],
        "quadratic_residual": [frac_str(s1), frac_str(s2)],
        "zero": s1 == 0 and s2 == 0 and all(r == 0 for r in lin),
    }
    report.certificates["positivity"] = pos.to_dict()
    report.certificates["crease_scan"] = {
        "normal": [1, 1],
        "n_probes": len(scan),
        "min_value": frac_str(worst[1]) if worst else None,
        "min_value_float": float(worst[1]) if worst else None,
        "argmin_a": frac_str(worst[0]) if worst else None,
        "n_negative": len(negatives),
        "error_bound": 0.0,
    }
    report.probes["crease"] = [
        {"a": frac_str(a), "value": frac_str(v), "value_float": float(v), "error": 0.0} for a, v in scan
    ]
    report.verdicts = {
        "extremal_almost_kahler": {"value": bool(pos.positive and bc.passed), "certificate": "positivity"},
        "extremal_kahler_excluded": {"value": bool(negatives), "certificate": "crease_scan"},
        "kahler_solution_in_ansatz": {
            "value": report.certificates["integrability"]["zero"],
            "certificate": "integrability",
        },
    }
    return report
