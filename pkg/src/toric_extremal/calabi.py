"""Generalized Calabi data: base factors, weight polynomial, Kähler-class shifts,
and the slope test for split bundles over a curve."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import List, Literal, Sequence, Tuple, Union

from .poly import MultiPoly, RatFunc, as_fraction
from .polytope import DelzantPolytope


class FibrationError(ValueError):
    pass


class FactorNotPositive(FibrationError):
    def __init__(self, index: int, vertex):
        super().__init__(
            f"factor {index}: <p,z>+c is not positive at vertex "
            f"({', '.join(str(x) for x in vertex)})"
        )
        self.index = index
        self.vertex = vertex


class BlowdownFacetMismatch(FibrationError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"blow-down factor {index}: {reason}")
        self.index = index


class NonPositiveDimension(FibrationError):
    def __init__(self, index: int):
        super().__init__(f"factor {index}: complex dimension must be >= 1")
        self.index = index


@dataclass(frozen=True)
class BaseFactor:
    d: int
    scal: Fraction
    p: Tuple[Fraction, ...]
    c: Fraction
    kind: Literal["free", "blowdown"] = "free"

    @classmethod
    def make(cls, d, scal, p, c, kind="free") -> "BaseFactor":
        return cls(int(d), as_fraction(scal), tuple(as_fraction(x) for x in p), as_fraction(c), kind)

    def affine(self) -> MultiPoly:
        return MultiPoly.affine(self.p, self.c)


@dataclass(frozen=True)
class FibrationData:
    polytope: DelzantPolytope
    factors: Tuple[BaseFactor, ...]

    @property
    def nvars(self) -> int:
        return self.polytope.dim_l

    @cached_property
    def weight(self) -> MultiPoly:
        """``p(z) = prod_j (<p_j,z> + c_j)^{d_j}``."""
        w = MultiPoly.constant(self.nvars, 1)
        for f in self.factors:
            w = w * f.affine() ** f.d
        return w

    @cached_property
    def base_scal_times_weight(self) -> MultiPoly:
        """``(sum_j Scal_j / (<p_j,z>+c_j)) * p(z)``, a polynomial since d_j >= 1."""
        out = MultiPoly(self.nvars)
        for j, f in enumerate(self.factors):
            term = MultiPoly.constant(self.nvars, f.scal) * f.affine() ** (f.d - 1)
            for k, g in enumerate(self.factors):
                if k != j:
                    term = term * g.affine() ** g.d
            out = out + term
        return out

    def base_scal(self) -> RatFunc:
        """``sum_j Scal_j / (<p_j,z> + c_j)``."""
        out = RatFunc.lift(0, self.nvars)
        for f in self.factors:
            out = out + RatFunc(MultiPoly.constant(self.nvars, f.scal), f.affine())
        return out


@dataclass(frozen=True)
class BundleSummand:
    degree: int
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")


def make_fibration(P: DelzantPolytope, factors: Sequence[BaseFactor]) -> FibrationData:
    factors = tuple(factors)
    for j, f in enumerate(factors):
        if f.d < 1:
            raise NonPositiveDimension(j)
        if len(f.p) != P.dim_l:
            raise FibrationError(f"factor {j}: p has length {len(f.p)}, expected {P.dim_l}")
        if f.kind == "free":
            # affine functions attain their minimum at a vertex
            for v in P.vertices:
                if f.affine()(v) <= 0:
                    raise FactorNotPositive(j, v)
        elif f.kind == "blowdown":
            _check_blowdown(P, j, f)
        else:
            raise FibrationError(f"factor {j}: unknown kind {f.kind!r}")
    return FibrationData(P, factors)


def _check_blowdown(P: DelzantPolytope, j: int, f: BaseFactor) -> None:
    match = [
        i for i, (u, c) in enumerate(P.halfspaces)
        if tuple(Fraction(x) for x in u) == f.p and c == f.c
    ]
    if not match:
        raise BlowdownFacetMismatch(j, "(p, c) is not the defining pair of any facet")
    if f.scal != 2 * f.d * (f.d + 1):
        raise BlowdownFacetMismatch(j, f"Scal must be 2d(d+1) = {2 * f.d * (f.d + 1)}")


def shift_class(F: FibrationData, k) -> FibrationData:
    """Move the Kähler class: ``c_a -> c_a + k`` on free factors only."""
    k = as_fraction(k)
    factors = [replace(f, c=f.c + k) if f.kind == "free" else f for f in F.factors]
    return make_fibration(F.polytope, factors)


def slope(s: BundleSummand) -> Fraction:
    return Fraction(s.degree, s.rank)


@dataclass(frozen=True)
class SlopeVerdict:
    passed: bool
    witness: Union[Tuple[BundleSummand, BundleSummand], None] = None


def csc_slope_obstruction(summands: Sequence[BundleSummand]) -> SlopeVerdict:
    """Equal slopes of all summands is necessary for a CSC metric on P(E).

    A failing verdict carries the first summand whose slope differs from
    the first one.
    """
    if not summands:
        raise ValueError("need at least one summand")
    first = summands[0]
    for s in summands[1:]:
        if slope(s) != slope(first):
            return SlopeVerdict(False, (first, s))
    return SlopeVerdict(True)
