"""Exact multivariate polynomials and rational functions over Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions, "num/den" strings and decimal strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # decimal repr, not the binary expansion: 1e-3 -> 1/1000
        return Fraction(repr(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class MultiPoly:
    """Polynomial in ``nvars`` variables with rational coefficients.

    Terms are stored as ``{exponent tuple: Fraction}`` with zero coefficients
    dropped, so equality is structural.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Exponent, Fraction] | None = None):
        self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise ValueError(f"exponent {e} does not have {nvars} entries")
            c = as_fraction(c)
            if c != 0:
                clean[tuple(e)] = c
        self.terms = clean

    # constructors

    @classmethod
    def constant(cls, nvars: int, c) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: as_fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "MultiPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def affine(cls, gradient: Sequence, constant=0) -> "MultiPoly":
        n = len(gradient)
        p = cls.constant(n, constant)
        for i, a in enumerate(gradient):
            p = p + cls.var(n, i) * as_fraction(a)
        return p

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1) -> "MultiPoly":
        return cls(len(exponent), {tuple(exponent): as_fraction(coeff)})

    def variables(self):
        return [MultiPoly.var(self.nvars, i) for i in range(self.nvars)]

    # arithmetic

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return MultiPoly.constant(self.nvars, other)

    def __add__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return MultiPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, RatFunc):
            return NotImplemented
        other = self._coerce(other)
        out: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return MultiPoly(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (MultiPoly, RatFunc)):
            return RatFunc(self) / other
        k = as_fraction(other)
        return MultiPoly(self.nvars, {e: c / k for e, c in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return other == self
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            mono = "*".join(
                f"z{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            c = self.terms[e]
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # queries

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def diff(self, i: int, k: int = 1) -> "MultiPoly":
        out = self
        for _ in range(k):
            terms = {}
            for e, c in out.terms.items():
                if e[i]:
                    e2 = list(e)
                    e2[i] -= 1
                    terms[tuple(e2)] = c * e[i]
            out = MultiPoly(self.nvars, terms)
        return out

    def __call__(self, *z):
        if len(z) == 1 and isinstance(z[0], (list, tuple, np.ndarray)):
            z = tuple(z[0])
        if len(z) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates")
        exact = all(isinstance(x, (int, Fraction)) for x in z)
        total = Fraction(0) if exact else 0.0
        for e, c in self.terms.items():
            term = c if exact else float(c)
            for x, k in zip(z, e):
                if k:
                    term = term * x**k
            total += term
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation at an ``(n, nvars)`` array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(len(pts))
        for e, c in self.terms.items():
            term = np.full(len(pts), float(c))
            for i, k in enumerate(e):
                if k:
                    term *= pts[:, i] ** k
            out += term
        return out

    def compose(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute ``z_i -> images[i]`` (all images share a variable count)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        m = images[0].nvars
        cache: Dict[Tuple[int, int], MultiPoly] = {}

        def power(i, k):
            if (i, k) not in cache:
                cache[(i, k)] = images[i] ** k
            return cache[(i, k)]

        out = MultiPoly(m)
        for e, c in self.terms.items():
            term = MultiPoly.constant(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def leading(self) -> Tuple[Exponent, Fraction]:
        e = max(self.terms)
        return e, self.terms[e]

    def divmod(self, divisor: "MultiPoly") -> Tuple["MultiPoly", "MultiPoly"]:
        """Multivariate division with respect to lex order."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        le, lc = divisor.leading()
        q = MultiPoly(self.nvars)
        r = MultiPoly(self.nvars)
        f = self
        while not f.is_zero():
            e, c = f.leading()
            if all(a >= b for a, b in zip(e, le)):
                t = MultiPoly(self.nvars, {tuple(a - b for a, b in zip(e, le)): c / lc})
                q = q + t
                f = f - t * divisor
            else:
                lt = MultiPoly(self.nvars, {e: c})
                r = r + lt
                f = f - lt
        return q, r

    def exact_div(self, divisor: "MultiPoly") -> "MultiPoly | None":
        q, r = self.divmod(divisor)
        return q if r.is_zero() else None


class RatFunc:
    """Quotient of two MultiPolys; cancels only when the division is exact."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None):
        if den is None:
            den = MultiPoly.constant(num.nvars, 1)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_constant():
            num, den = num / den.constant_term(), MultiPoly.constant(num.nvars, 1)
        elif not num.is_zero():
            q = num.exact_div(den)
            if q is not None:
                num, den = q, MultiPoly.constant(num.nvars, 1)
        else:
            den = MultiPoly.constant(num.nvars, 1)
        self.num = num
        self.den = den

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @staticmethod
    def lift(x, nvars: int) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, MultiPoly):
            return RatFunc(x)
        return RatFunc(MultiPoly.constant(nvars, x))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> MultiPoly:
        if not self.is_polynomial():
            raise ValueError("rational function is not a polynomial")
        return self.num

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other):
        o = RatFunc.lift(other, self.nvars)
        if o.den == self.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RatFunc.lift(other, self.nvars))

    def __rsub__(self, other):
        return RatFunc.lift(other, self.nvars) - self

    def __mul__(self, other):
        o = RatFunc.lift(other, self.nvars)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RatFunc.lift(other, self.nvars)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RatFunc.lift(other, self.nvars) / self

    def __eq__(self, other):
        try:
            o = RatFunc.lift(other, self.nvars)
        except TypeError:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self):
        raise TypeError("RatFunc is unhashable")

    def __repr__(self):
        if self.is_polynomial():
            return repr(self.num)
        return f"({self.num}) / ({self.den})"

    def cancel(self, factors: Iterable[MultiPoly]) -> "RatFunc":
        """Divide numerator and denominator by each of ``factors`` as often as
        both are exactly divisible (a cheap substitute for a polynomial gcd
        when the candidate common factors are known)."""
        num, den = self.num, self.den
        for f in factors:
            if f.is_constant():
                continue
            while not den.is_constant():
                qn, qd = num.exact_div(f), den.exact_div(f)
                if qn is None or qd is None:
                    break
                num, den = qn, qd
        return RatFunc(num, den)

    def diff(self, i: int, k: int = 1) -> "RatFunc":
        out = self
        for _ in range(k):
            out = RatFunc(
                out.num.diff(i) * out.den - out.num * out.den.diff(i), out.den * out.den
            )
        return out

    def __call__(self, *z):
        return self.num(*z) / self.den(*z)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return self.num.evaluate_many(points) / self.den.evaluate_many(points)


def poly_from_terms(nvars: int, terms: Iterable) -> MultiPoly:
    """Build from ``[[exponents...], coeff]`` pairs (the JSON encoding)."""
    out = {}
    for e, c in terms:
        e = tuple(int(k) for k in e)
        out[e] = out.get(e, 0) + as_fraction(c)
    return MultiPoly(nvars, out)


def poly_to_terms(p: MultiPoly) -> list:
    return [[list(e), str(c)] for e, c in sorted(p.terms.items())]
