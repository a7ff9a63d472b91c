"""CM points, the modular j-function, and class polynomials.

CM points are exact surds (p + q*sqrt(d))/r.  j-values are evaluated from the
integer q-expansion of j = E4^3/Delta (coefficients computed exactly, then
summed with mpmath at the requested precision, with an explicit tail bound).
An integer j is only reported as certified when the residual is tiny and the
class number of the point's discriminant is one, so that rounding is backed
by the degree of the class polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .forms import BinaryQuadraticForm, class_number, class_group, reduce_form

_CERT_TOL = Fraction(1, 10**10)


class PrecisionError(ArithmeticError):
    """Requested certification is not supported by the working precision."""


@dataclass(frozen=True)
class CMPoint:
    """tau = (p + q*sqrt(d))/r in the upper half plane, d < 0, q > 0, r > 0."""

    p: int
    q: int
    r: int
    d: int

    def __post_init__(self):
        if self.d >= 0 or self.q <= 0 or self.r <= 0:
            raise ValueError("CM point needs d < 0, q > 0, r > 0")
        g = math.gcd(math.gcd(abs(self.p), self.q), self.r)
        if g > 1:
            object.__setattr__(self, "p", self.p // g)
            object.__setattr__(self, "q", self.q // g)
            object.__setattr__(self, "r", self.r // g)

    def form(self) -> BinaryQuadraticForm:
        """The primitive positive form with root tau: A tau^2 + B tau + C = 0."""
        A = self.r * self.r
        B = -2 * self.p * self.r
        C = self.p * self.p - self.q * self.q * self.d
        g = math.gcd(math.gcd(A, abs(B)), C)
        return BinaryQuadraticForm(A // g, B // g, C // g)

    def discriminant(self) -> int:
        """Discriminant of the CM order: the discriminant of form()."""
        return self.form().discriminant()

    def reduced(self) -> "CMPoint":
        """SL2-translate into the fundamental domain (Im >= sqrt(3)/2)."""
        Q = reduce_form(self.form()).form
        return CMPoint(-Q.b, 1, 2 * Q.a, Q.discriminant())

    def approx(self, bits: int = 256) -> mpmath.mpc:
        with mpmath.workprec(bits):
            return mpmath.mpc(
                mpmath.mpf(self.p) / self.r,
                mpmath.sqrt(mpmath.mpf(-self.d)) * self.q / self.r,
            )

    def __str__(self) -> str:
        return f"({self.p}+{self.q}*sqrt({self.d}))/{self.r}"


def cm_point_of_form(Q: BinaryQuadraticForm) -> CMPoint:
    """tau = (-b + sqrt(d))/(2a), the CM point attached to the form."""
    return CMPoint(-Q.b, 1, 2 * Q.a, Q.discriminant())


# -- integer q-expansion of j --------------------------------------------------


_j_coeff_cache: list[int] = []


def j_coefficients(n_terms: int) -> list[int]:
    """Coefficients c_0..c_{n_terms} of j(q) = 1/q + sum c_n q^n, exact."""
    global _j_coeff_cache
    if len(_j_coeff_cache) >= n_terms + 1:
        return _j_coeff_cache[: n_terms + 1]
    N = n_terms + 2  # series precision in powers of q
    sigma3 = [0] * (N + 1)
    for k in range(1, N + 1):
        k3 = k * k * k
        for mult in range(k, N + 1, k):
            sigma3[mult] += k3
    e4 = [1] + [240 * sigma3[k] for k in range(1, N + 1)]
    e4cubed = _series_mul(_series_mul(e4, e4, N), e4, N)
    # Delta/q = prod (1 - q^n)^24
    prod = [1] + [0] * N
    for n in range(1, N + 1):
        factor = [0] * (N + 1)
        factor[0] = 1
        if n <= N:
            factor[n] = -1
        for _ in range(24):
            prod = _series_mul(prod, factor, N)
    inv = _series_inverse(prod, N)
    j_shift = _series_mul(e4cubed, inv, N)  # = q * j(q): coefficients c_{n-1}
    assert j_shift[0] == 1 and j_shift[1] == 744 and j_shift[2] == 196884
    _j_coeff_cache = j_shift[1:]
    return _j_coeff_cache[: n_terms + 1]


def _series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * (n + 1)
    for i, ai in enumerate(a[: n + 1]):
        if not ai:
            continue
        for j, bj in enumerate(b[: n + 1 - i]):
            if bj:
                out[i + j] += ai * bj
    return out


def _series_inverse(a: list[int], n: int) -> list[int]:
    assert a[0] == 1
    out = [1] + [0] * n
    for k in range(1, n + 1):
        acc = 0
        for i in range(1, k + 1):
            if i < len(a) and a[i]:
                acc += a[i] * out[k - i]
        out[k] = -acc
    return out


@dataclass(frozen=True)
class JValue:
    value: complex  # mpmath mpc, at the working precision
    certified: Optional[int]  # integer j, only when certified
    precision_bits: int
    n_terms: int


def _tail_bound_ok(q_abs, n_terms: int, bits: int) -> bool:
    # |c_n| <= e^(4 pi sqrt(n)); geometric comparison from the n_terms-th term on
    with mpmath.workprec(64):
        t = mpmath.exp(4 * mpmath.pi * mpmath.sqrt(n_terms + 1)) * q_abs ** (n_terms + 1)
        ratio = mpmath.exp(2 * mpmath.pi / mpmath.sqrt(n_terms + 1)) * q_abs
        if ratio >= 1:
            return False
        tail = t / (1 - ratio)
        return tail < mpmath.mpf(2) ** (-(bits // 2))


def j_cm(tau: CMPoint, precision_bits: int = 256, n_terms: int = 64) -> JValue:
    """j(tau) by the q-expansion, tail-bounded below 2^(-precision_bits/2).

    The point is first reduced into the fundamental domain, so |q| <=
    e^(-pi sqrt 3) and the series truncation is effective.  The rounded
    integer is certified only for class number one.
    """
    if precision_bits < 64:
        raise PrecisionError("precision_bits must be at least 64")
    red = tau.reduced()
    with mpmath.workprec(precision_bits + 64):
        tq = red.approx(precision_bits + 64)
        qvar = mpmath.exp(2j * mpmath.pi * tq)
        q_abs = abs(qvar)
        terms = n_terms
        while not _tail_bound_ok(q_abs, terms, precision_bits):
            terms *= 2
            if terms > 4096:
                raise PrecisionError("tail bound unreachable; point too close to the real axis")
        coeffs = j_coefficients(terms)
        acc = mpmath.mpc(0)
        for c in reversed(coeffs):
            acc = acc * qvar + c
        val = acc + 1 / qvar
        rounded = int(mpmath.nint(val.real))
        resid = abs(val - rounded)
        certified = None
        if resid < mpmath.mpf(_CERT_TOL.denominator) ** -1 and class_number(red.discriminant()) == 1:
            certified = rounded
        return JValue(val, certified, precision_bits, terms)


def hilbert_class_poly(d: int, precision_bits: int = 256) -> list[int]:
    """Monic integer polynomial with roots j(tau_Q), Q through Cl(d).

    Coefficients low-to-high.  Rounding is re-verified at doubled precision;
    a residual above 2^(-precision_bits/4) raises PrecisionError.
    """
    coeffs = _class_poly_attempt(d, precision_bits)
    again = _class_poly_attempt(d, 2 * precision_bits)
    if coeffs != again:
        raise PrecisionError(f"class polynomial for d={d} unstable under precision doubling")
    return coeffs


def _class_poly_attempt(d: int, bits: int) -> list[int]:
    G = class_group(d)
    with mpmath.workprec(bits + 64):
        js = [j_cm(cm_point_of_form(Q), bits).value for Q in G.elements]
        poly = [mpmath.mpc(1)]
        for j in js:
            poly = [mpmath.mpc(0)] + poly
            for i in range(len(poly) - 1):
                poly[i] -= j * poly[i + 1]
        out = []
        tol = mpmath.mpf(2) ** (-(bits // 4))
        for c in poly:
            r = int(mpmath.nint(c.real))
            if abs(c - r) > tol:
                raise PrecisionError(f"coefficient residual {abs(c - r)} too large for d={d}")
            out.append(r)
    assert len(out) == G.order + 1 and out[-1] == 1
    return out
