"""Elliptic surfaces with section over Q(sqrt(m))(t).

Weierstrass models carry exact polynomial coefficients.  Kodaira types are
read off the valuation triple (v(c4), v(c6), v(Delta)) of the local minimal
model, which is equivalent to Tate's algorithm in residue characteristic 0.
Sections are analyzed exactly: intersection with the zero section from the
pole orders of x, fiber components from valuations against a Hensel-refined
critical point of the local Weierstrass cubic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .funcfield import (
    FieldElement,
    Poly,
    RationalFunction,
    field_roots,
    field_sqrt_in,
)

INF_VAL = 10**9  # valuation of the zero polynomial


class EllipticSurfaceError(ValueError):
    pass


class NonMinimalError(EllipticSurfaceError):
    pass


class ComponentAmbiguityError(EllipticSurfaceError):
    pass


# -- places -------------------------------------------------------------------


@dataclass(frozen=True)
class Place:
    """A linear place t = root of the base P^1, or the place at infinity."""

    root: Optional[FieldElement]  # None encodes infinity

    @property
    def is_infinity(self) -> bool:
        return self.root is None

    def __str__(self) -> str:
        return "oo" if self.is_infinity else f"t={self.root}"


INFINITY = Place(None)


# -- Kodaira fibers -----------------------------------------------------------

_ADDITIVE_DATA = {
    # kind: (components, group order, euler offset)
    "II": (1, 1, 2),
    "III": (2, 2, 3),
    "IV": (3, 3, 4),
    "I0*": (5, 4, 6),
    "IV*": (7, 3, 8),
    "III*": (8, 2, 9),
    "II*": (9, 1, 10),
}


@dataclass(frozen=True)
class KodairaFiber:
    kind: str  # "I0", "In", "In*", or an entry of _ADDITIVE_DATA
    n: int = 0
    split: Optional[bool] = None

    def __post_init__(self):
        if self.kind not in ("I0", "In", "In*") and self.kind not in _ADDITIVE_DATA:
            raise EllipticSurfaceError(f"unknown Kodaira kind {self.kind!r}")
        if self.kind == "In" and self.n < 1:
            raise EllipticSurfaceError("In needs n >= 1")
        if self.kind == "In*" and self.n < 1:
            raise EllipticSurfaceError("In* needs n >= 1 (use I0*)")

    @property
    def symbol(self) -> str:
        if self.kind == "In":
            return f"I{self.n}"
        if self.kind == "In*":
            return f"I{self.n}*"
        return self.kind

    @property
    def components(self) -> int:
        if self.kind == "I0":
            return 1
        if self.kind == "In":
            return self.n
        if self.kind == "In*":
            return 5 + self.n
        return _ADDITIVE_DATA[self.kind][0]

    @property
    def rank_contribution(self) -> int:
        return self.components - 1

    @property
    def group_order(self) -> int:
        """Determinant contribution to the Neron-Severi discriminant."""
        if self.kind == "I0":
            return 1
        if self.kind == "In":
            return self.n
        if self.kind == "In*":
            return 4
        return _ADDITIVE_DATA[self.kind][1]

    @property
    def euler(self) -> int:
        if self.kind == "I0":
            return 0
        if self.kind == "In":
            return self.n
        if self.kind == "In*":
            return 6 + self.n
        return _ADDITIVE_DATA[self.kind][2]

    @property
    def is_multiplicative(self) -> bool:
        return self.kind == "In"

    @property
    def is_additive(self) -> bool:
        return self.kind not in ("I0", "In")

    def component_group(self) -> tuple[int, ...]:
        if self.kind == "In":
            return (self.n,) if self.n > 1 else ()
        if self.kind == "I0*":
            return (2, 2)
        if self.kind == "In*":
            return (2, 2) if self.n % 2 == 0 else (4,)
        return {"II": (), "III": (2,), "IV": (3,), "IV*": (3,), "III*": (2,), "II*": (), "I0": ()}[self.kind]

    def __str__(self) -> str:
        return self.symbol


def fiber(symbol: str, split: Optional[bool] = None) -> KodairaFiber:
    """Build a fiber from its symbol, e.g. 'I6', 'I1*', 'IV*', 'II'."""
    if symbol in _ADDITIVE_DATA or symbol == "I0":
        return KodairaFiber(symbol, split=split)
    if symbol.startswith("I") and symbol.endswith("*"):
        n = int(symbol[1:-1])
        return KodairaFiber("I0*" if n == 0 else "In*", n=n, split=split)
    if symbol.startswith("I"):
        n = int(symbol[1:])
        return KodairaFiber("I0" if n == 0 else "In", n=n, split=split)
    raise EllipticSurfaceError(f"cannot parse fiber symbol {symbol!r}")


# -- Weierstrass models --------------------------------------------------------


@dataclass(frozen=True)
class WeierstrassModel:
    a1: Poly
    a2: Poly
    a3: Poly
    a4: Poly
    a6: Poly

    @staticmethod
    def from_lists(coeffs, m: int = 1) -> "WeierstrassModel":
        a1, a2, a3, a4, a6 = (Poly(c, m) for c in coeffs)
        return WeierstrassModel(a1, a2, a3, a4, a6)

    @property
    def m(self) -> int:
        for a in (self.a1, self.a2, self.a3, self.a4, self.a6):
            if a.m != 1:
                return a.m
        return 1

    def coefficients(self) -> tuple[Poly, Poly, Poly, Poly, Poly]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    # standard b/c covariants
    def b2(self) -> Poly:
        return self.a1 * self.a1 + 4 * self.a2

    def b4(self) -> Poly:
        return 2 * self.a4 + self.a1 * self.a3

    def b6(self) -> Poly:
        return self.a3 * self.a3 + 4 * self.a6

    def b8(self) -> Poly:
        return (
            self.a1 * self.a1 * self.a6
            + 4 * self.a2 * self.a6
            - self.a1 * self.a3 * self.a4
            + self.a2 * self.a3 * self.a3
            - self.a4 * self.a4
        )

    def c4(self) -> Poly:
        b2, b4 = self.b2(), self.b4()
        return b2 * b2 - 24 * b4

    def c6(self) -> Poly:
        b2, b4, b6 = self.b2(), self.b4(), self.b6()
        return -(b2 * b2 * b2) + 36 * b2 * b4 - 216 * b6

    def delta(self) -> Poly:
        b2, b4, b6, b8 = self.b2(), self.b4(), self.b6(), self.b8()
        return -(b2 * b2) * b8 - 8 * (b4 * b4 * b4) - 27 * (b6 * b6) + 9 * b2 * b4 * b6

    def is_short(self) -> bool:
        return self.a1.is_zero() and self.a2.is_zero() and self.a3.is_zero()

    def rescaled(self, u: Union[Poly, FieldElement, int, Fraction]) -> "WeierstrassModel":
        """(x, y) -> (u^2 x, u^3 y): a_i -> a_i / u^i (must stay polynomial)."""
        if not isinstance(u, Poly):
            u_el = FieldElement.of(u)
            return WeierstrassModel(
                *(a * (u_el.inverse() ** i) for a, i in zip(self.coefficients(), (1, 2, 3, 4, 6)))
            )
        out = []
        for a, i in zip(self.coefficients(), (1, 2, 3, 4, 6)):
            q, r = divmod(a, u**i)
            if not r.is_zero():
                raise EllipticSurfaceError("coefficient not divisible in rescaling")
            out.append(q)
        return WeierstrassModel(*out)

    def chart_weight(self) -> int:
        """Smallest k with deg(a_i) <= i*k; the Euler characteristic bound."""
        k = 0
        for a, i in zip(self.coefficients(), (1, 2, 3, 4, 6)):
            if not a.is_zero():
                k = max(k, -(-a.degree() // i))
        return k

    def infinity_chart(self) -> tuple["WeierstrassModel", int]:
        """Model in the coordinate s = 1/t; the fiber at infinity sits at s = 0."""
        k = self.chart_weight()
        out = []
        for a, i in zip(self.coefficients(), (1, 2, 3, 4, 6)):
            if a.is_zero():
                out.append(a)
            else:
                out.append(a.reversed_coeffs(i * k))
        return WeierstrassModel(*out), k

    def __str__(self) -> str:
        return (
            f"y^2 + ({self.a1})xy + ({self.a3})y = "
            f"x^3 + ({self.a2})x^2 + ({self.a4})x + ({self.a6})"
        )


def invariants(W: WeierstrassModel) -> dict[str, Poly]:
    """c4, c6, Delta with the defining identity verified exactly."""
    c4, c6, delta = W.c4(), W.c6(), W.delta()
    if delta.is_zero():
        raise EllipticSurfaceError("Delta = 0: not an elliptic surface")
    assert 1728 * delta == c4**3 - c6**2
    return {"c4": c4, "c6": c6, "delta": delta}


def short_model(W: WeierstrassModel) -> WeierstrassModel:
    """The K(t)-isomorphic model Y^2 = X^3 - 27 c4 X - 54 c6 (X = 36x + 3b2)."""
    zero = Poly.zero(W.m)
    return WeierstrassModel(zero, zero, zero, -27 * W.c4(), -54 * W.c6())


# -- local classification --------------------------------------------------------


def _val(p: Poly, r: FieldElement) -> int:
    return INF_VAL if p.is_zero() else p.valuation_at_root(r)


def kodaira_from_triple(v4: int, v6: int, vd: int) -> KodairaFiber:
    """Kodaira type of a minimal triple (v(c4), v(c6), v(Delta)), char 0."""
    if vd == 0:
        return KodairaFiber("I0")
    if v4 == 0:
        return KodairaFiber("In", n=vd)
    checks = {
        "II": vd == 2 and v6 == 1,
        "III": vd == 3 and v4 == 1,
        "IV": vd == 4 and v6 == 2,
    }
    for kind, ok in checks.items():
        if ok:
            return KodairaFiber(kind)
    if vd == 6:
        if v4 >= 2 and v6 >= 3:
            return KodairaFiber("I0*")
    elif vd > 6 and v4 == 2:
        if v6 == 3:
            return KodairaFiber("In*", n=vd - 6)
    elif vd == 8 and v4 >= 3 and v6 == 4:
        return KodairaFiber("IV*")
    elif vd == 9 and v4 == 3 and v6 >= 5:
        return KodairaFiber("III*")
    elif vd == 10 and v4 >= 4 and v6 == 5:
        return KodairaFiber("II*")
    raise EllipticSurfaceError(f"inconsistent valuation triple ({v4}, {v6}, {vd})")


@dataclass(frozen=True)
class LocalModel:
    """Minimal local data at a linear place, in short-form coordinates."""

    place: Place
    root: FieldElement  # root in the working chart (s = 0 at infinity)
    scale: int  # minimalization exponent k: (x,y) scaled by uniformizer^(2k,3k)
    v4: int
    v6: int
    vd: int
    A: Poly  # short a4 after rescaling
    B: Poly  # short a6 after rescaling
    fiber: KodairaFiber


def _localize(W: WeierstrassModel, place: Place) -> LocalModel:
    if place.is_infinity:
        Wc, _ = W.infinity_chart()
        root = FieldElement.of(0)
    else:
        Wc = W
        root = place.root
    c4, c6, delta = Wc.c4(), Wc.c6(), Wc.delta()
    if delta.is_zero():
        raise EllipticSurfaceError("Delta = 0: not an elliptic surface")
    v4, v6, vd = _val(c4, root), _val(c6, root), _val(delta, root)
    k = min(v4 // 4, v6 // 6, vd // 12)
    A, B = -27 * c4, -54 * c6
    if k > 0:
        g = Poly([-root, 1], Wc.m)
        A = A // g ** (4 * k)
        B = B // g ** (6 * k)
        v4, v6, vd = v4 - 4 * k, v6 - 6 * k, vd - 12 * k
    fib = kodaira_from_triple(v4, v6, vd)
    if fib.is_multiplicative:
        fib = KodairaFiber("In", n=fib.n, split=_split_flag(A, B, root, Wc.m))
    return LocalModel(place, root, k, v4, v6, vd, A, B, fib)


def _node_x(A: Poly, B: Poly, root: FieldElement) -> FieldElement:
    """x-coordinate of the node of the reduced cubic X^3 + A(r) X + B(r)."""
    a, b = A(root), B(root)
    # double root of X^3 + aX + b: root of gcd with derivative 3X^2 + a
    # gcd step: X^3 + aX + b = (3X^2+a) * X/3 + (2a/3 X + b)
    rem1 = (FieldElement.of(2) * a / 3, b)  # (2a/3) X + b
    if not rem1[0]:
        raise EllipticSurfaceError("cubic has a triple root; fiber is not multiplicative")
    x0 = -rem1[1] / rem1[0]
    assert x0**3 + a * x0 + b == 0 and 3 * x0 * x0 + a == 0
    return x0


def _split_flag(A: Poly, B: Poly, root: FieldElement, m: int) -> bool:
    """Split multiplicative reduction: tangent-cone slope 3*x0 is a square."""
    x0 = _node_x(A, B, root)
    return field_sqrt_in(3 * x0, m) is not None


def localize_minimal(W: WeierstrassModel, place: Place) -> tuple[WeierstrassModel, dict]:
    """Model minimal at the place via (x,y) -> (u^2 x, u^3 y), u a uniformizer power.

    Falls back to the short model when the given coefficients do not admit the
    direct rescaling.  The record reports the chart and the exponent used.
    """
    if place.is_infinity:
        Wc, k = W.infinity_chart()
        record = {"chart": "s=1/t", "weight": k}
        root = FieldElement.of(0)
    else:
        Wc, record = W, {"chart": "t"}
        root = place.root
    loc = _localize(W, place)
    record["exponent"] = loc.scale
    if loc.scale == 0:
        return Wc, record
    g = Poly([-root, 1], Wc.m)
    try:
        return Wc.rescaled(g**loc.scale), record
    except EllipticSurfaceError:
        record["chart"] += " (short form)"
        return short_model(Wc).rescaled(g**loc.scale), record


def kodaira_type(W: WeierstrassModel, place: Place) -> KodairaFiber:
    """Kodaira fiber at the place; the model must already be minimal there."""
    loc = _localize(W, place)
    if loc.scale > 0:
        raise NonMinimalError(f"model is not minimal at {place} (scale {loc.scale})")
    return loc.fiber


# -- surveys --------------------------------------------------------------------


@dataclass(frozen=True)
class SurveyEntry:
    place: Place
    fiber: KodairaFiber


@dataclass(frozen=True)
class FiberSurvey:
    entries: tuple[SurveyEntry, ...]  # sorted: finite places by root, then infinity
    i1_bundle_degree: int  # residual squarefree part: that many I1 fibers
    euler_total: int
    chi: int

    def symbols(self) -> list[str]:
        return [e.fiber.symbol for e in self.entries]

    def by_place(self) -> dict[str, str]:
        return {str(e.place): e.fiber.symbol for e in self.entries}

    def fibers_with_bundle(self) -> list[KodairaFiber]:
        out = [e.fiber for e in self.entries]
        out.extend(KodairaFiber("In", n=1) for _ in range(self.i1_bundle_degree))
        return out


def fiber_survey(W: WeierstrassModel) -> FiberSurvey:
    """Classify all singular fibers.

    Linear places over the base field are handled individually; the leftover
    factor of Delta must be squarefree and coprime to c4 and is reported as a
    bundle of deg-many I1 fibers (its roots are conjugate nodal fibers).
    """
    inv = invariants(W)
    delta, c4 = inv["delta"], inv["c4"]
    roots, cof = field_roots(delta)
    if cof.degree() > 0:
        if not cof.gcd(cof.derivative()).degree() == 0:
            raise EllipticSurfaceError(
                "multiple fiber at a non-linear place; extend the base field to split it"
            )
        if not c4.is_zero() and cof.gcd(c4).degree() > 0:
            raise EllipticSurfaceError(
                "additive fiber at a non-linear place; extend the base field to split it"
            )
        if c4.is_zero():
            raise EllipticSurfaceError(
                "additive fiber at a non-linear place; extend the base field to split it"
            )
    entries = []
    euler = 0
    for r, _mult in roots:
        loc = _localize(W, Place(r))
        if loc.fiber.kind == "I0":
            continue  # junk factor cleared by minimalization
        entries.append(SurveyEntry(Place(r), loc.fiber))
        euler += loc.fiber.euler
    loc_inf = _localize(W, INFINITY)
    if loc_inf.fiber.kind != "I0":
        entries.append(SurveyEntry(INFINITY, loc_inf.fiber))
        euler += loc_inf.fiber.euler
    euler += cof.degree()
    if euler % 12:
        raise EllipticSurfaceError(f"Euler checksum {euler} is not a multiple of 12")
    return FiberSurvey(tuple(entries), cof.degree(), euler, euler // 12)


# -- base change and twists -------------------------------------------------------


def base_change(W: WeierstrassModel, phi: RationalFunction) -> WeierstrassModel:
    """Substitute t = phi(s) and clear denominators by a (u^2, u^3) rescaling."""
    phi = RationalFunction.of(phi, W.m)
    if phi.is_constant():
        raise EllipticSurfaceError("base change by a constant map")
    subs = [a.subst(phi) for a in W.coefficients()]
    q = phi.den
    weights = (1, 2, 3, 4, 6)
    if q.degree() == 0:
        polys = [s.as_poly() for s in subs]
        return WeierstrassModel(*polys)
    k = 0
    for s, i in zip(subs, weights):
        if s.is_zero():
            continue
        p = 0
        acc = s
        while not acc.is_poly():
            acc = acc * q
            p += 1
        k = max(k, -(-p // i))
    out = []
    for s, i in zip(subs, weights):
        lifted = s * RationalFunction.of(q**(i * k), W.m)
        out.append(lifted.as_poly())
    return WeierstrassModel(*out)


def quadratic_twist(W: WeierstrassModel, gamma: Union[Poly, FieldElement, int, Fraction]) -> WeierstrassModel:
    """Twist y^2 = x^3 + a4 x + a6 into y^2 = x^3 + gamma^2 a4 x + gamma^3 a6."""
    if not W.is_short():
        raise EllipticSurfaceError("twist needs a short model; complete the square first")
    if not isinstance(gamma, Poly):
        gamma = Poly.const(FieldElement.of(gamma), W.m)
    if gamma.is_zero():
        raise EllipticSurfaceError("twist by zero")
    zero = Poly.zero(W.m)
    return WeierstrassModel(zero, zero, zero, gamma**2 * W.a4, gamma**3 * W.a6)


# -- Shioda-Tate bookkeeping -------------------------------------------------------


@dataclass(frozen=True)
class ShiodaTate:
    rho: int
    ns_disc: int


def shioda_tate(
    fibers: list[KodairaFiber], mw_rank: int, torsion_order: int, mwl_disc: Fraction
) -> ShiodaTate:
    """rho = 2 + sum (m_v - 1) + rank;  |disc NS| = prod(orders) * |mwl| / tors^2."""
    rho = 2 + sum(f.rank_contribution for f in fibers) + mw_rank
    prod = 1
    for f in fibers:
        prod *= f.group_order
    disc = Fraction(prod) * abs(Fraction(mwl_disc)) / torsion_order**2
    if disc.denominator != 1:
        raise EllipticSurfaceError(f"non-integral NS discriminant {disc}")
    return ShiodaTate(rho, -int(disc))


def torsion_embeds(fibers: list[KodairaFiber], torsion_invariants: list[int]) -> bool:
    """Necessary torsion bound: the group must embed into the product of the
    fiber component groups (partition domination prime by prime)."""
    comp: list[int] = []
    for f in fibers:
        comp.extend(f.component_group())
    return _group_embeds(torsion_invariants, comp)


def _group_embeds(inv_a: list[int], inv_b: list[int]) -> bool:
    primes = set()
    for n in list(inv_a) + list(inv_b):
        p = 2
        while p * p <= n:
            if n % p == 0:
                primes.add(p)
                while n % p == 0:
                    n //= p
            p += 1
        if n > 1:
            primes.add(n)
    for p in primes:
        pa = sorted((_padic(n, p) for n in inv_a if _padic(n, p)), reverse=True)
        pb = sorted((_padic(n, p) for n in inv_b if _padic(n, p)), reverse=True)
        pb += [0] * max(0, len(pa) - len(pb))
        if any(a > b for a, b in zip(pa, pb)):
            return False
    return True


def _padic(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- height contributions -----------------------------------------------------------


def local_contribution(f: KodairaFiber, i: int, j: Optional[int] = None) -> Fraction:
    """Height contribution table; i (and j) are simple-component indices.

    Index 0 is the identity component.  For In the indices run mod n; for
    In* index 1 is the near component and 2, 3 the far ones.
    """
    if j is None:
        j = i
    if i == 0 or j == 0:
        return Fraction(0)
    i, j = min(i, j), max(i, j)
    kind = f.kind
    if kind == "I0":
        raise EllipticSurfaceError("smooth fiber has a single component")
    if kind == "In":
        n = f.n
        if not (0 < i < n and 0 < j < n):
            raise EllipticSurfaceError(f"component index out of range for I{n}")
        return Fraction(i * (n - j), n)
    if kind == "II" or kind == "II*":
        raise EllipticSurfaceError(f"{kind} has no non-identity simple component")
    if kind == "III":
        _require_range(i, j, 1)
        return Fraction(1, 2)
    if kind == "IV":
        _require_range(i, j, 2)
        return Fraction(2, 3) if i == j else Fraction(1, 3)
    if kind == "I0*":
        _require_range(i, j, 3)
        return Fraction(1) if i == j else Fraction(1, 2)
    if kind == "In*":
        _require_range(i, j, 3)
        n = f.n
        if i == 1:
            return Fraction(1) if j == 1 else Fraction(1, 2)
        if i == j:
            return 1 + Fraction(n, 4)
        return Fraction(1, 2) + Fraction(n, 4)
    if kind == "IV*":
        _require_range(i, j, 2)
        return Fraction(4, 3) if i == j else Fraction(2, 3)
    if kind == "III*":
        _require_range(i, j, 1)
        return Fraction(3, 2)
    raise EllipticSurfaceError(f"no contribution table for {kind}")


def _require_range(i: int, j: int, top: int):
    if not (1 <= i <= top and 1 <= j <= top):
        raise EllipticSurfaceError("component index out of range")


def height_from_data(chi: int, po: int, contribs: list[Fraction]) -> Fraction:
    """h(P) = 2 chi + 2 (P.O) - sum of local contributions."""
    h = 2 * chi + 2 * po - sum(contribs, Fraction(0))
    if h < 0:
        warnings.warn(f"negative height {h}: data inconsistent for a non-torsion section")
    return h


# -- section analysis ----------------------------------------------------------------


@dataclass(frozen=True)
class SectionData:
    x: RationalFunction
    y: RationalFunction

    @staticmethod
    def on_curve(W: WeierstrassModel, x, y) -> "SectionData":
        x = RationalFunction.of(x, W.m)
        y = RationalFunction.of(y, W.m)
        a1, a2, a3, a4, a6 = (RationalFunction.of(a, W.m) for a in W.coefficients())
        lhs = y * y + a1 * x * y + a3 * y
        rhs = x**3 + a2 * x * x + a4 * x + a6
        if lhs != rhs:
            raise EllipticSurfaceError("point does not satisfy the Weierstrass equation")
        return SectionData(x, y)


@dataclass(frozen=True)
class PlaceRecord:
    place: Place
    fiber: KodairaFiber
    contact: int  # local intersection with the zero section
    through_singular: bool
    component: Optional[int]  # min(k, n-k) for In; None when not applicable
    contribution: Fraction


@dataclass(frozen=True)
class SectionReport:
    height: Fraction
    chi: int
    po: int
    places: tuple[PlaceRecord, ...]
    is_zero_section: bool = False


def analyze_section(W: WeierstrassModel, P: Optional[SectionData]) -> SectionReport:
    """Height data of a section: P.O from poles of x, fiber components from
    local valuations, total assembled as 2 chi + 2 P.O - sum contr."""
    survey = fiber_survey(W)
    if P is None:
        return SectionReport(Fraction(0), survey.chi, 0, (), is_zero_section=True)
    P = SectionData.on_curve(W, P.x, P.y)
    m = W.m
    # short coordinates: X = 36 x + 3 b2, Y = 216 y + 108 (a1 x + a3)
    b2 = RationalFunction.of(W.b2(), m)
    X = 36 * P.x + 3 * b2
    records: list[PlaceRecord] = []
    handled_roots: list[FieldElement] = []

    inf_fiber = None
    for e in survey.entries:
        if e.place.is_infinity:
            inf_fiber = e.fiber
            continue
        records.append(_analyze_at_place(W, X, e.place, e.fiber, e.place.root))
        handled_roots.append(e.place.root)

    # infinity: move to the s-chart
    Winf, k = W.infinity_chart()
    s = RationalFunction(Poly.t(m))
    Xinf = X.subst(1 / s) * s ** (2 * k)
    zero = FieldElement.of(0)
    if inf_fiber is not None:
        records.append(_analyze_at_place(Winf, Xinf, INFINITY, inf_fiber, zero))
    else:
        v = _rf_valuation(Xinf, zero)
        if v < 0:
            _require_even(v)
            records.append(PlaceRecord(INFINITY, KodairaFiber("I0"), -v // 2, False, 0, Fraction(0)))

    # contacts at good finite places: poles of X away from the bad fibers
    den = X.den
    if den.degree() > 0:
        roots, cof = field_roots(den)
        for r, mult in roots:
            if any(r == h for h in handled_roots):
                continue
            _require_even(mult)
            records.append(PlaceRecord(Place(r), KodairaFiber("I0"), mult // 2, False, 0, Fraction(0)))
        if cof.degree() > 0:
            sq = cof.sqrt()
            if sq is None:
                raise EllipticSurfaceError("odd pole order at a non-linear place")
            # a bundle of conjugate contact points, deg(sq) in total
            records.append(PlaceRecord(Place(None), KodairaFiber("I0"), sq.degree(), False, 0, Fraction(0)))
    po = sum(r.contact for r in records)
    contribs = [r.contribution for r in records if r.contribution]
    h = height_from_data(survey.chi, po, contribs)
    return SectionReport(h, survey.chi, po, tuple(records))


def _require_even(v: int):
    if v % 2:
        raise EllipticSurfaceError(f"odd pole order {v} of x (model not minimal?)")


def _rf_valuation(f: RationalFunction, r: FieldElement) -> int:
    if f.is_zero():
        return INF_VAL
    return f.valuation_at_root(r)


def _analyze_at_place(
    Wc: WeierstrassModel,
    X: RationalFunction,
    report_place: Place,
    fib: KodairaFiber,
    root: FieldElement,
) -> PlaceRecord:
    """Local analysis at a finite root of the working chart (Wc, X already
    transformed to that chart)."""
    loc = _localize(Wc, Place(root))
    assert loc.fiber.symbol == fib.symbol
    m = Wc.m
    g = Poly([-root, 1], m)
    Xl = X if not loc.scale else X / RationalFunction.of(g ** (2 * loc.scale), m)
    v = _rf_valuation(Xl, root)
    if v < 0:
        _require_even(v)
        return PlaceRecord(report_place, fib, -v // 2, False, 0, Fraction(0))
    if fib.is_additive:
        if v == 0:
            return PlaceRecord(report_place, fib, 0, False, 0, Fraction(0))
        # reduces to the cusp (0, 0) of the short model: non-identity component
        kind = fib.kind
        if kind in ("II", "II*"):
            raise EllipticSurfaceError(
                f"section through the singular point of a {kind} fiber: impossible for a minimal model"
            )
        if kind == "In*":
            raise ComponentAmbiguityError(
                f"cannot separate near/far components of {fib.symbol}; contribution is 1 or 1 + n/4"
            )
        contr = {
            "III": Fraction(1, 2),
            "IV": Fraction(2, 3),
            "I0*": Fraction(1),
            "IV*": Fraction(4, 3),
            "III*": Fraction(3, 2),
        }[kind]
        return PlaceRecord(report_place, fib, 0, True, None, contr)
    # multiplicative: decide the component against the refined critical point
    n = fib.n
    x0 = _node_x(loc.A, loc.B, root)
    if Xl(root) != x0:
        return PlaceRecord(report_place, fib, 0, False, 0, Fraction(0))
    if n == 1:
        raise EllipticSurfaceError(
            "section through the node of an I1 fiber: impossible for a minimal model"
        )
    x_ref = _hensel_critical_point(loc.A, loc.B, x0, g, n + 2)
    crit_val = x_ref * x_ref * x_ref + loc.A * x_ref + loc.B
    assert _val(crit_val, root) == n, "critical value valuation disagrees with the I_n order"
    w = _rf_valuation(Xl - RationalFunction.of(x_ref, m), root)
    if n % 2 == 0 and w >= n // 2:
        comp = n // 2
    else:
        comp = w
        if comp > n // 2:
            raise EllipticSurfaceError("component valuation exceeds the fiber bound")
    contr = Fraction(comp * (n - comp), n)
    return PlaceRecord(report_place, fib, 0, True, comp, contr)


def _hensel_critical_point(A: Poly, B: Poly, x0: FieldElement, g: Poly, prec: int) -> Poly:
    """Newton-lift the critical point of X^3 + A X + B from the residue field
    to K[t]/(g^prec); the Hessian 6 x0 is a unit, so the lift is unique."""
    m = A.m
    gp = g**prec
    x = Poly.const(x0, m)
    for _ in range(prec + 1):
        fval = (3 * x * x + A) % gp
        if fval.is_zero():
            break
        inv = _poly_inverse_mod((6 * x) % gp, gp)
        x = (x - fval * inv) % gp
    assert ((3 * x * x + A) % gp).is_zero(), "Hensel lift did not converge"
    return x


def _poly_inverse_mod(u: Poly, modulus: Poly) -> Poly:
    """Inverse of u modulo the polynomial modulus (they must be coprime)."""
    r0, r1 = modulus, u % modulus
    s0, s1 = Poly.zero(u.m), Poly.one(u.m)
    while not r1.is_zero():
        q, r2 = divmod(r0, r1)
        r0, r1 = r1, r2
        s0, s1 = s1, s0 - q * s1
    if r0.degree() != 0:
        raise EllipticSurfaceError("element not invertible modulo the given power")
    return (s0 * Poly.const(r0[0].inverse(), u.m)) % modulus
