"""Exact arithmetic over Q(sqrt(m)) and the rational function field Q(sqrt(m))(t).

Elements of the quadratic field are pairs u + v*sqrt(m) of rationals; m = 1
encodes plain Q.  Polynomials are dense coefficient lists in t, rational
functions are reduced fractions of polynomials with monic denominator.  All
operations are exact (fractions.Fraction throughout); the only external helper
is sympy's univariate factorization over Q, used to locate roots of
polynomials inside the base field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Union

import sympy

Rat = Union[int, Fraction]

_SYMPY_T = sympy.Symbol("t")


def sqrt_fraction(x: Fraction) -> Optional[Fraction]:
    """Exact square root of a rational, or None if not a square."""
    if x < 0:
        return None
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class FieldElement:
    """u + v*sqrt(m) with rational u, v; m squarefree, m = 1 meaning v = 0."""

    u: Fraction
    v: Fraction
    m: int

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))
        if self.m == 0:
            raise ValueError("m = 0 is not a quadratic field")
        if self.v == 0 and self.m != 1:
            object.__setattr__(self, "m", 1)  # canonical form for rationals
        if self.m == 1 and self.v != 0:
            raise ValueError("sqrt(1) is rational; use the u part")

    # -- coercion ---------------------------------------------------------

    @staticmethod
    def of(x: "Elt", m: int = 1) -> "FieldElement":
        if isinstance(x, FieldElement):
            return x
        return FieldElement(Fraction(x), Fraction(0), 1)

    def _join(self, other: "FieldElement") -> int:
        if self.m == 1:
            return other.m
        if other.m == 1 or other.m == self.m:
            return self.m
        raise ValueError(f"incompatible fields Q(sqrt {self.m}) and Q(sqrt {other.m})")

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "Elt") -> "FieldElement":
        o = FieldElement.of(other)
        m = self._join(o)
        return FieldElement(self.u + o.u, self.v + o.v, m)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.u, -self.v, self.m)

    def __sub__(self, other: "Elt") -> "FieldElement":
        return self + (-FieldElement.of(other))

    def __rsub__(self, other: "Elt") -> "FieldElement":
        return FieldElement.of(other) + (-self)

    def __mul__(self, other: "Elt") -> "FieldElement":
        o = FieldElement.of(other)
        m = self._join(o)
        if m == 1:
            return FieldElement(self.u * o.u, Fraction(0), 1)
        return FieldElement(self.u * o.u + m * self.v * o.v, self.u * o.v + self.v * o.u, m)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("zero element of the quadratic field")
        return FieldElement(self.u / n, -self.v / n, self.m)

    def __truediv__(self, other: "Elt") -> "FieldElement":
        return self * FieldElement.of(other).inverse()

    def __rtruediv__(self, other: "Elt") -> "FieldElement":
        return FieldElement.of(other) * self.inverse()

    def __pow__(self, k: int) -> "FieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        r = FieldElement(Fraction(1), Fraction(0), 1)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = FieldElement.of(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if self.v == 0 and other.v == 0:
            return self.u == other.u
        return self.u == other.u and self.v == other.v and self.m == other.m

    def __hash__(self):
        return hash((self.u, self.v, self.m if self.v else 1))

    def __bool__(self) -> bool:
        return self.u != 0 or self.v != 0

    # -- structure --------------------------------------------------------

    def conj(self) -> "FieldElement":
        return FieldElement(self.u, -self.v, self.m)

    def norm(self) -> Fraction:
        return self.u * self.u - self.m * self.v * self.v

    def is_rational(self) -> bool:
        return self.v == 0

    def as_fraction(self) -> Fraction:
        if self.v != 0:
            raise ValueError(f"{self} is irrational")
        return self.u

    def sqrt(self) -> Optional["FieldElement"]:
        """A square root inside the same field Q(sqrt(m)), or None."""
        m = self.m
        if self.v == 0:
            r = sqrt_fraction(self.u)
            if r is not None:
                return FieldElement(r, Fraction(0), 1)
            if m != 1:
                r = sqrt_fraction(self.u / m)
                if r is not None:
                    return FieldElement(Fraction(0), r, m)
            return None
        # (x + y sqrt m)^2 = u + v sqrt m:  x^2 + m y^2 = u, 2xy = v
        disc = self.u * self.u - m * self.v * self.v
        s = sqrt_fraction(disc)
        if s is None:
            return None
        for t in (self.u + s, self.u - s):
            x = sqrt_fraction(t / 2)
            if x is not None and x != 0:
                y = self.v / (2 * x)
                cand = FieldElement(x, y, m)
                if cand * cand == self:
                    return cand
        return None

    def is_square(self) -> bool:
        return self.sqrt() is not None

    def __repr__(self) -> str:
        if self.v == 0:
            return str(self.u)
        vpart = "w" if self.v == 1 else f"{self.v}*w"
        if self.u == 0:
            return vpart
        sign = "+" if self.v > 0 else "-"
        vabs = "w" if abs(self.v) == 1 else f"{abs(self.v)}*w"
        return f"{self.u}{sign}{vabs}"


Elt = Union[int, Fraction, FieldElement]


def fe(x: Rat, y: Rat = 0, m: int = 1) -> FieldElement:
    """Shorthand constructor: fe(u, v, m) = u + v*sqrt(m)."""
    return FieldElement(Fraction(x), Fraction(y), m if y else 1)


def field_sqrt_in(x: FieldElement, m: int) -> Optional[FieldElement]:
    """Square root of x viewed inside Q(sqrt(m)); x must live in that field."""
    if not x.is_rational() and x.m != m:
        raise ValueError("element not in the requested field")
    if x.is_rational() and m != 1:
        x = FieldElement(x.u, Fraction(0), 1)
        r = x.sqrt()
        if r is not None:
            return r
        t = sqrt_fraction(x.u / m)
        if t is not None:
            return FieldElement(Fraction(0), t, m)
        return None
    return x.sqrt()


class Poly:
    """Dense polynomial in t over Q(sqrt(m)); trailing zeros stripped."""

    __slots__ = ("coeffs", "m")

    def __init__(self, coeffs: Iterable[Elt], m: int = 1):
        cs = [FieldElement.of(c) for c in coeffs]
        for c in cs:
            if not c.is_rational():
                if m == 1:
                    m = c.m
                elif c.m != m:
                    raise ValueError("mixed quadratic fields in one polynomial")
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)
        self.m = m

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(m: int = 1) -> "Poly":
        return Poly([], m)

    @staticmethod
    def one(m: int = 1) -> "Poly":
        return Poly([1], m)

    @staticmethod
    def const(x: Elt, m: int = 1) -> "Poly":
        return Poly([x], m)

    @staticmethod
    def t(m: int = 1) -> "Poly":
        return Poly([0, 1], m)

    # -- basic structure ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def leading(self) -> FieldElement:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __getitem__(self, i: int) -> FieldElement:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return FieldElement.of(0)

    def __iter__(self) -> Iterator[FieldElement]:
        return iter(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, FieldElement)):
            other = Poly.const(other, self.m)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # -- ring operations ---------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(other, self.m)

    def __add__(self, other) -> "Poly":
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return Poly([self[i] + o[i] for i in range(n)], self.m or o.m)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs], self.m)

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Poly":
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return Poly.zero(self.m or o.m)
        out = [FieldElement.of(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out, self.m or o.m)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        r = Poly.one(self.m)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def __divmod__(self, other) -> tuple["Poly", "Poly"]:
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        q = [FieldElement.of(0)] * max(0, len(self.coeffs) - len(o.coeffs) + 1)
        r = list(self.coeffs)
        dlead = o.leading()
        dd = o.degree()
        while len(r) - 1 >= dd and r:
            k = len(r) - 1 - dd
            f = r[-1] / dlead
            q[k] = f
            for i, c in enumerate(o.coeffs):
                r[k + i] = r[k + i] - f * c
            while r and not r[-1]:
                r.pop()
        return Poly(q, self.m), Poly(r, self.m)

    def __floordiv__(self, other) -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "Poly":
        return divmod(self, other)[1]

    def divides(self, other: "Poly") -> bool:
        return (other % self).is_zero()

    # -- field-of-fractions helpers ----------------------------------------

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.leading()
        return Poly([c / lead for c in self.coeffs], self.m)

    def derivative(self) -> "Poly":
        return Poly([self.coeffs[i] * i for i in range(1, len(self.coeffs))], self.m)

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, self._coerce(other)
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def conj(self) -> "Poly":
        return Poly([c.conj() for c in self.coeffs], self.m)

    def is_rational(self) -> bool:
        return all(c.is_rational() for c in self.coeffs)

    def __call__(self, x: Elt) -> FieldElement:
        acc = FieldElement.of(0)
        for c in reversed(self.coeffs):
            acc = acc * FieldElement.of(x) + c
        return acc

    def subst(self, phi: "RationalFunction") -> "RationalFunction":
        acc = RationalFunction(Poly.zero(self.m), Poly.one(self.m))
        for c in reversed(self.coeffs):
            acc = acc * phi + c
        return acc

    def reversed_coeffs(self, upto_degree: int) -> "Poly":
        """t^n * p(1/t) where n = upto_degree; requires n >= deg p."""
        if upto_degree < self.degree():
            raise ValueError("reversal degree below polynomial degree")
        out = [FieldElement.of(0)] * (upto_degree + 1)
        for i, c in enumerate(self.coeffs):
            out[upto_degree - i] = c
        return Poly(out, self.m)

    def valuation_at_root(self, r: FieldElement) -> int:
        """Multiplicity of the root t = r (0 if not a root); poly must be nonzero."""
        if self.is_zero():
            raise ValueError("valuation of the zero polynomial")
        lin = Poly([-FieldElement.of(r), 1], self.m)
        v = 0
        p = self
        while True:
            q, rem = divmod(p, lin)
            if not rem.is_zero():
                return v
            p = q
            v += 1

    def sqrt(self) -> Optional["Poly"]:
        """Exact polynomial square root, or None."""
        if self.is_zero():
            return Poly.zero(self.m)
        d = self.degree()
        if d % 2:
            return None
        lead = field_sqrt_in(self.leading(), self.m)
        if lead is None:
            return None
        half = d // 2
        s = [FieldElement.of(0)] * (half + 1)
        s[half] = lead
        # [t^(half+k)] s^2 = 2*s[half]*s[k] + sum of middle products; solve top-down
        for k in range(half - 1, -1, -1):
            acc = FieldElement.of(0)
            for i in range(k + 1, half):
                acc = acc + s[i] * s[half + k - i]
            s[k] = (self[half + k] - acc) / (2 * lead)
        cand = Poly(s, self.m)
        if cand * cand == self:
            return cand
        return None

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(f"{c!r}")
            elif i == 1:
                parts.append(f"({c!r})*t")
            else:
                parts.append(f"({c!r})*t^{i}")
        return " + ".join(parts)


class RationalFunction:
    """Reduced quotient of Polys with monic denominator."""

    __slots__ = ("num", "den", "m")

    def __init__(self, num: Union[Poly, Elt], den: Union[Poly, Elt, None] = None, m: int = 1):
        if not isinstance(num, Poly):
            num = Poly.const(num, m)
        if den is None:
            den = Poly.one(num.m)
        elif not isinstance(den, Poly):
            den = Poly.const(den, num.m)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        m = num.m if num.m != 1 else den.m
        g = num.gcd(den)
        if not g.is_zero() and g.degree() > 0:
            num, den = num // g, den // g
        lead = den.leading()
        num = Poly([c / lead for c in num.coeffs], m)
        den = Poly([c / lead for c in den.coeffs], m)
        self.num, self.den, self.m = num, den, m

    @staticmethod
    def of(x, m: int = 1) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, Poly):
            return RationalFunction(x)
        return RationalFunction(Poly.const(x, m))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree() == 0

    def as_poly(self) -> Poly:
        if not self.is_poly():
            raise ValueError(f"{self!r} is not polynomial")
        return self.num

    def is_constant(self) -> bool:
        return self.is_poly() and self.num.degree() <= 0

    def as_constant(self) -> FieldElement:
        if not self.is_constant():
            raise ValueError(f"{self!r} is not constant")
        return self.num[0]

    def __add__(self, other) -> "RationalFunction":
        o = RationalFunction.of(other, self.m)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-RationalFunction.of(other, self.m))

    def __rsub__(self, other) -> "RationalFunction":
        return RationalFunction.of(other, self.m) + (-self)

    def __mul__(self, other) -> "RationalFunction":
        o = RationalFunction.of(other, self.m)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        o = RationalFunction.of(other, self.m)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return RationalFunction.of(other, self.m) / self

    def __pow__(self, k: int) -> "RationalFunction":
        if k < 0:
            return (1 / self) ** (-k)
        return RationalFunction(self.num**k, self.den**k)

    def __eq__(self, other) -> bool:
        o = RationalFunction.of(other, self.m)
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def conj(self) -> "RationalFunction":
        return RationalFunction(self.num.conj(), self.den.conj())

    def __call__(self, x: Elt) -> FieldElement:
        d = self.den(x)
        if not d:
            raise ZeroDivisionError(f"pole at t = {x}")
        return self.num(x) / d

    def subst(self, phi: "RationalFunction") -> "RationalFunction":
        return self.num.subst(phi) / self.den.subst(phi)

    def valuation_at_root(self, r: FieldElement) -> int:
        """Order of vanishing at t = r (negative at a pole)."""
        if self.is_zero():
            raise ValueError("valuation of zero")
        return self.num.valuation_at_root(r) - self.den.valuation_at_root(r)

    def degree_at_infinity(self) -> int:
        """Valuation at t = infinity: deg(den) - deg(num)."""
        if self.is_zero():
            raise ValueError("valuation of zero")
        return self.den.degree() - self.num.degree()

    def sqrt(self) -> Optional["RationalFunction"]:
        """Exact square root in the same field, or None."""
        if self.is_zero():
            return RationalFunction.of(0, self.m)
        ds = self.den.sqrt()
        if ds is None:
            return None
        ns = self.num.sqrt()
        if ns is None:
            return None
        return RationalFunction(ns, ds)

    def __repr__(self) -> str:
        if self.is_poly():
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"


# -- root finding over the base field ---------------------------------------


def _factor_rational_poly(coeffs: list[Fraction]) -> list[tuple[list[Fraction], int]]:
    """Irreducible monic factors (with multiplicity) of a Q[t] polynomial via sympy."""
    expr = [sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)]
    p = sympy.Poly(expr, _SYMPY_T, domain="QQ")
    _, factors = p.factor_list()
    out = []
    for fac, mult in factors:
        fac = fac.monic()
        cs = [Fraction(c.p, c.q) for c in reversed(fac.all_coeffs())]
        out.append((cs, int(mult)))
    return out


def field_roots(f: Poly) -> tuple[list[tuple[FieldElement, int]], Poly]:
    """All roots of f in Q(sqrt(m)) with multiplicities, plus the rootless cofactor.

    The cofactor is monic; f = lc(f) * prod (t - r)^mult * cofactor.
    """
    if f.is_zero():
        raise ValueError("root finding on the zero polynomial")
    m = f.m
    if f.degree() == 0:
        return [], Poly.one(m)
    g = f if f.is_rational() else f * f.conj()
    rat_coeffs = [c.as_fraction() for c in g.coeffs]
    candidates: list[FieldElement] = []
    for fac, _ in _factor_rational_poly(rat_coeffs):
        if len(fac) == 2:  # monic t + c0
            candidates.append(FieldElement.of(-fac[0]))
        elif len(fac) == 3 and m != 1:  # monic t^2 + b t + c
            b, c = fac[1], fac[0]
            disc = b * b - 4 * c
            s = sqrt_fraction(disc / m)
            if s is not None:
                for sign in (1, -1):
                    candidates.append(FieldElement(-b / 2, sign * s / 2, m))
    roots: list[tuple[FieldElement, int]] = []
    cof = f.monic()
    for r in candidates:
        if not f(r):
            mult = cof.valuation_at_root(r)
            if mult > 0:
                lin = Poly([-r, 1], m)
                for _ in range(mult):
                    cof = cof // lin
                roots.append((r, mult))
    roots.sort(key=lambda pair: _root_sort_key(pair[0]))
    return roots, cof


def _root_sort_key(r: FieldElement):
    return (r.u, r.v)
