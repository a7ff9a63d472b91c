"""Positive definite even binary quadratic forms and their class groups.

A triple (a, b, c) stands for the classical form a x^2 + b xy + c y^2,
equivalently the even Gram matrix ((2a, b), (b, 2c)).  Equivalence is proper
(SL2); the improper class shows up only through the inverse rule b -> -b.
Composition is Gauss composition via united forms, and every structural claim
is cross-checked in the tests against plain enumeration of reduced forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

Matrix2 = tuple[tuple[int, int], tuple[int, int]]

IDENTITY_2 = ((1, 0), (0, 1))


class FormError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BinaryQuadraticForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if not all(isinstance(x, int) for x in (self.a, self.b, self.c)):
            raise FormError("coefficients must be integers")
        if self.a <= 0 or self.c <= 0 or self.discriminant() >= 0:
            raise FormError(f"form {self.triple()} is not positive definite")

    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def is_primitive(self) -> bool:
        return self.content() == 1

    def gram(self) -> Matrix2:
        return ((2 * self.a, self.b), (self.b, 2 * self.c))

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def inverse(self) -> "BinaryQuadraticForm":
        return BinaryQuadraticForm(self.a, -self.b, self.c)

    def is_reduced(self) -> bool:
        ok = -self.a < self.b <= self.a <= self.c
        if ok and self.a == self.c:
            ok = self.b >= 0
        return ok

    def is_ambiguous(self) -> bool:
        """Reduced form equals its inverse, i.e. the class is two-torsion."""
        if not self.is_reduced():
            raise FormError("ambiguity test expects a reduced form")
        return self.b == 0 or self.b == self.a or self.a == self.c

    def scaled(self, k: int) -> "BinaryQuadraticForm":
        return BinaryQuadraticForm(k * self.a, k * self.b, k * self.c)

    def primitive_part(self) -> tuple["BinaryQuadraticForm", int]:
        g = self.content()
        return BinaryQuadraticForm(self.a // g, self.b // g, self.c // g), g

    def transform(self, M: Matrix2) -> "BinaryQuadraticForm":
        """Form with Gram M^T G M, i.e. substitution (x, y) -> M (x, y)."""
        (p, q), (r, s) = M
        a = self.value(p, r)
        c = self.value(q, s)
        b = 2 * self.a * p * q + self.b * (p * s + q * r) + 2 * self.c * r * s
        return BinaryQuadraticForm(a, b, c)

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def _mat_mul(A: Matrix2, B: Matrix2) -> Matrix2:
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _mat_det(M: Matrix2) -> int:
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


@dataclass(frozen=True)
class ReducedForm:
    form: BinaryQuadraticForm
    matrix: Matrix2  # M in SL2(Z) with M^T G_input M = G_reduced


def reduce_form(Q: BinaryQuadraticForm) -> ReducedForm:
    """Gauss reduction with an SL2 witness transporting the Gram matrices."""
    a, b, c = Q.a, Q.b, Q.c
    M = IDENTITY_2
    while True:
        if -a < b <= a <= c and (b >= 0 or a != c):
            break
        # translate b into (-a, a]
        if b > a or b <= -a:
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * k * a
            M = _mat_mul(M, ((1, k), (0, 1)))
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            M = _mat_mul(M, ((0, -1), (1, 0)))
    R = BinaryQuadraticForm(a, b, c)
    assert _mat_det(M) == 1 and Q.transform(M) == R
    return ReducedForm(R, M)


def principal_form(d: int) -> BinaryQuadraticForm:
    _check_discriminant(d)
    if d % 2 == 0:
        return BinaryQuadraticForm(1, 0, -d // 4)
    return BinaryQuadraticForm(1, 1, (1 - d) // 4)


def _check_discriminant(d: int):
    if d >= 0 or d % 4 not in (0, 1):
        raise FormError(f"{d} is not a negative discriminant (need d < 0, d = 0,1 mod 4)")


def reduced_forms(d: int, primitive_only: bool = True, stop_after: Optional[int] = None) -> list[BinaryQuadraticForm]:
    """All reduced forms of discriminant d, enumerated by 0 < a <= sqrt(|d|/3)."""
    _check_discriminant(d)
    out = []
    amax = math.isqrt(-d // 3)
    parity = d & 1
    for a in range(1, amax + 1):
        four_a = 4 * a
        b = -a + 1
        if (b & 1) != parity:
            b += 1
        while b <= a:
            num = b * b - d
            if num % four_a == 0:
                c = num // four_a
                if c >= a and not (a == c and b < 0):
                    if not primitive_only or math.gcd(math.gcd(a, b), c) == 1:
                        out.append(BinaryQuadraticForm(a, b, c))
                        if stop_after is not None and len(out) > stop_after:
                            return out
            b += 2
    out.sort()
    return out


def class_number(d: int) -> int:
    return len(reduced_forms(d))


def compose(Q1: BinaryQuadraticForm, Q2: BinaryQuadraticForm) -> BinaryQuadraticForm:
    """Reduced Gauss composite of two primitive forms of equal discriminant.

    United-forms method: replace Q2 by an equivalent form whose first
    coefficient is coprime to a1, align the middle coefficients by CRT, then
    multiply the concordant forms.
    """
    d = Q1.discriminant()
    if Q2.discriminant() != d:
        raise FormError("composition needs equal discriminants")
    if not (Q1.is_primitive() and Q2.is_primitive()):
        raise FormError("composition needs primitive forms")
    a1, b1 = Q1.a, Q1.b
    a2, b2 = _coprime_representative(Q2, a1)
    # B = b1 mod 2a1, B = b2 mod 2a2 with gcd(2a1, 2a2) = 2 and b1 = b2 = d mod 2
    g, u, v = _xgcd(2 * a1, 2 * a2)
    assert g == 2 and (b2 - b1) % 2 == 0
    B = b1 + 2 * a1 * u * ((b2 - b1) // 2)
    mod = 2 * a1 * a2
    B %= mod
    A = a1 * a2
    C, rem = divmod(B * B - d, 4 * A)
    assert rem == 0
    return reduce_form(BinaryQuadraticForm(A, B, C)).form


def _coprime_representative(Q: BinaryQuadraticForm, n: int) -> tuple[int, int]:
    """(a', b') of a form properly equivalent to Q with gcd(a', n) = 1."""
    if math.gcd(Q.a, n) == 1:
        return Q.a, Q.b
    bound = 1
    while bound < 64:
        for x in range(-bound, bound + 1):
            for y in range(-bound, bound + 1):
                if math.gcd(x, y) != 1:
                    continue
                val = Q.value(x, y)
                if val > 0 and math.gcd(val, n) == 1:
                    g, w, z = _xgcd(x, y)  # x*w + y*z = g = +-1
                    if g < 0:
                        w, z = -w, -z
                    # complete (x, y) to an SL2 matrix with first column (x, y)
                    u, w2 = -z, w
                    assert x * w2 - y * u == 1
                    T = Q.transform(((x, u), (y, w2)))
                    return T.a, T.b
        bound *= 2
    raise FormError("no coprime representative found (should not happen for primitive forms)")


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def form_pow(Q: BinaryQuadraticForm, k: int) -> BinaryQuadraticForm:
    d = Q.discriminant()
    if k < 0:
        return form_pow(Q.inverse(), -k)
    r = reduce_form(principal_form(d)).form
    b = reduce_form(Q).form
    while k:
        if k & 1:
            r = compose(r, b)
        b = compose(b, b)
        k >>= 1
    return r


@dataclass(frozen=True)
class ClassGroup:
    d: int
    elements: tuple[BinaryQuadraticForm, ...]
    structure: tuple[int, ...]  # invariant factors, ascending divisibility chain
    principal: BinaryQuadraticForm

    @property
    def order(self) -> int:
        return len(self.elements)

    def element_order(self, Q: BinaryQuadraticForm) -> int:
        r = reduce_form(Q).form
        n = 1
        acc = r
        while acc != self.principal:
            acc = compose(acc, r)
            n += 1
            if n > self.order:
                raise FormError("element order exceeds group order (composition bug)")
        return n

    def squares(self) -> set[BinaryQuadraticForm]:
        return {compose(Q, Q) for Q in self.elements}

    def is_two_torsion(self) -> bool:
        return all(Q.is_ambiguous() for Q in self.elements)


def class_group(d: int) -> ClassGroup:
    elements = tuple(reduced_forms(d))
    principal = principal_form(d)
    structure = _abelian_invariants(elements, principal)
    return ClassGroup(d, elements, structure, principal)


def _abelian_invariants(elements, principal) -> tuple[int, ...]:
    h = len(elements)
    if h == 1:
        return ()
    orders = {}
    for Q in elements:
        n = 1
        acc = Q
        while acc != principal:
            acc = compose(acc, Q)
            n += 1
        orders[Q] = n
    exponent = 1
    for n in orders.values():
        exponent = exponent * n // math.gcd(exponent, n)
    # per prime p: #(p^k-torsion) = p^(sum_i min(k, lambda_i)) recovers the partition
    partitions: dict[int, list[int]] = {}
    for p in _prime_divisors(h):
        counts = [0]
        k = 1
        while True:
            pk = p**k
            cnt = sum(1 for n in orders.values() if pk % n == 0)
            e = round(math.log(cnt, p))
            if p**e != cnt:
                raise FormError("torsion count is not a p-power (composition bug)")
            counts.append(e)
            if pk >= _p_part(exponent, p):
                break
            k += 1
        conj = [counts[i + 1] - counts[i] for i in range(len(counts) - 1)]
        lam: list[int] = []
        for c in conj:
            for j in range(c):
                if j >= len(lam):
                    lam.append(0)
                lam[j] += 1
        partitions[p] = sorted(lam, reverse=True)
    width = max(len(v) for v in partitions.values())
    invariants = []
    for i in range(width):
        f = 1
        for p, lam in partitions.items():
            if i < len(lam):
                f *= p ** lam[i]
        invariants.append(f)
    assert math.prod(invariants) == h
    return tuple(sorted(invariants))


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def _prime_divisors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


# -- automorphisms -----------------------------------------------------------


@dataclass(frozen=True)
class AutomorphismGroup:
    order: int
    name: str  # trivial | klein | D8 | D12
    matrices: tuple[Matrix2, ...]


def automorphism_group(Q: BinaryQuadraticForm) -> AutomorphismGroup:
    """Integral isometries of the even Gram matrix, found by brute force.

    The search box comes from 4a*Q(x,y) = (2ax+by)^2 + |d| y^2, which bounds
    |y| and |x| for any target value of the form.
    """
    if not Q.is_reduced():
        raise FormError("automorphism search expects a reduced form (reduce first)")
    a, b, c = Q.a, Q.b, Q.c
    d = -Q.discriminant()
    vec_a = _representations(Q, a, d)
    vec_c = _representations(Q, c, d)
    mats = []
    for p, r in vec_a:
        for q, s in vec_c:
            if 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s == b:
                M = ((p, q), (r, s))
                det = _mat_det(M)
                assert det in (1, -1)
                mats.append(M)
    order = len(mats)
    name = {2: "trivial", 4: "klein", 8: "D8", 12: "D12"}.get(order)
    if name is None:
        raise FormError(f"unexpected automorphism count {order} for {Q}")
    return AutomorphismGroup(order, name, tuple(sorted(mats)))


def _representations(Q: BinaryQuadraticForm, value: int, abs_d: int) -> list[tuple[int, int]]:
    out = []
    ymax = math.isqrt(4 * Q.a * value // abs_d)
    xmax = math.isqrt(4 * Q.c * value // abs_d)
    for x in range(-xmax, xmax + 1):
        for y in range(-ymax, ymax + 1):
            if Q.value(x, y) == value:
                out.append((x, y))
    return out


# -- genus theory -------------------------------------------------------------


@dataclass(frozen=True)
class GenusInfo:
    genus_members: tuple[BinaryQuadraticForm, ...]
    genus_size: int
    in_principal_genus: bool


def genus_info(Q: BinaryQuadraticForm) -> GenusInfo:
    """Genus of [Q] as the coset [Q] * Cl(d)^2 of the principal genus."""
    if not Q.is_primitive():
        raise FormError("genus theory needs a primitive form")
    d = Q.discriminant()
    G = class_group(d)
    squares = G.squares()
    R = reduce_form(Q).form
    members = sorted(compose(R, S) for S in squares)
    return GenusInfo(tuple(members), len(squares), R in squares)


# -- scans --------------------------------------------------------------------


def kronecker_at_2(d: int) -> int:
    """Kronecker symbol (d/2): 0 for even d, else +1 for d = +-1, -1 for d = +-3 mod 8."""
    if d >= 0:
        raise FormError("expected a negative discriminant")
    if d % 2 == 0:
        return 0
    return 1 if d % 8 in (1, 7) else -1


def is_two_torsion_discriminant(d: int) -> bool:
    """Cl(d) has exponent <= 2, i.e. every reduced primitive form is ambiguous."""
    _check_discriminant(d)
    for Q in reduced_forms(d):
        if not Q.is_ambiguous():
            return False
    return True


def two_torsion_scan(bound: int) -> list[int]:
    """All discriminants |d| <= bound whose class group is only two-torsion."""
    if bound < 4:
        raise FormError("bound must be at least 4")
    out = []
    for ad in range(3, bound + 1):
        d = -ad
        if d % 4 in (0, 1) and is_two_torsion_discriminant(d):
            out.append(d)
    out.sort(key=abs)
    return out


@lru_cache(maxsize=None)
def class_number_one_discriminants(bound: int = 10_000) -> tuple[int, ...]:
    """The 13 discriminants with h(d) = 1 (scan certified up to |d| <= bound)."""
    out = []
    for ad in range(3, bound + 1):
        d = -ad
        if d % 4 in (0, 1) and len(reduced_forms(d, stop_after=1)) == 1:
            out.append(d)
    out.sort(key=abs)
    if len(out) != 13:
        raise FormError(f"class-number-one scan found {len(out)} values, expected 13")
    return tuple(out)
