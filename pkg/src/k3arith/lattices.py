"""Even integral lattices and their finite discriminant forms.

Gram matrices are exact integer matrices with even diagonal.  The
discriminant group L^vee/L is presented through the Smith normal form of the
Gram matrix (computed with transforms via sympy); the induced quadratic form
takes values in Q/2Z and the bilinear form in Q/Z, both stored as reduced
fractions.  Isomorphism testing of discriminant forms is exhaustive and
restricted to small groups, which covers every rank-2 situation needed here.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import sympy
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from .forms import BinaryQuadraticForm, reduced_forms


class LatticeError(ValueError):
    pass


GROUP_SIZE_LIMIT = 10_000


@dataclass(frozen=True)
class EvenLattice:
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.gram)
        if n == 0 or any(len(row) != n for row in self.gram):
            raise LatticeError("Gram matrix must be square and nonempty")
        for i in range(n):
            if self.gram[i][i] % 2:
                raise LatticeError("diagonal entries must be even")
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise LatticeError("Gram matrix must be symmetric")
        if self.det == 0:
            raise LatticeError("Gram matrix is singular")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return _int_det(self.gram)

    def rescaled(self, n: int) -> "EvenLattice":
        if n == 0:
            raise LatticeError("rescaling by 0")
        return EvenLattice(tuple(tuple(n * x for x in row) for row in self.gram))

    def direct_sum(self, other: "EvenLattice") -> "EvenLattice":
        return direct_sum(self, other)

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(x) for x in row) for row in self.gram) + "]"


def _int_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss determinant."""
    n = len(rows)
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


# -- named lattices -----------------------------------------------------------


def hyperbolic_plane() -> EvenLattice:
    return EvenLattice(((0, 1), (1, 0)))


def root_lattice_A(n: int) -> EvenLattice:
    if n < 1:
        raise LatticeError("A_n needs n >= 1")
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = 2
        if i + 1 < n:
            g[i][i + 1] = g[i + 1][i] = -1
    return EvenLattice(tuple(tuple(r) for r in g))


def root_lattice_D(n: int) -> EvenLattice:
    if n < 4:
        raise LatticeError("D_n needs n >= 4")
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = 2
    # path 0-1-...-(n-2), extra node n-1 attached to node n-3
    for i in range(n - 2):
        g[i][i + 1] = g[i + 1][i] = -1
    g[n - 3][n - 1] = g[n - 1][n - 3] = -1
    return EvenLattice(tuple(tuple(r) for r in g))


def root_lattice_E8() -> EvenLattice:
    g = [[2, -1, 0, 0, 0, 0, 0, 0],
         [-1, 2, -1, 0, 0, 0, 0, 0],
         [0, -1, 2, -1, 0, 0, 0, -1],
         [0, 0, -1, 2, -1, 0, 0, 0],
         [0, 0, 0, -1, 2, -1, 0, 0],
         [0, 0, 0, 0, -1, 2, -1, 0],
         [0, 0, 0, 0, 0, -1, 2, 0],
         [0, 0, -1, 0, 0, 0, 0, 2]]
    L = EvenLattice(tuple(tuple(r) for r in g))
    assert L.det == 1
    return L


def rank_one(even_norm: int) -> EvenLattice:
    if even_norm == 0 or even_norm % 2:
        raise LatticeError("rank-1 lattice needs a nonzero even norm")
    return EvenLattice(((even_norm,),))


def from_form(Q: BinaryQuadraticForm) -> EvenLattice:
    return EvenLattice(Q.gram())


def direct_sum(*lattices: EvenLattice) -> EvenLattice:
    if not lattices:
        raise LatticeError("empty direct sum")
    n = sum(L.rank for L in lattices)
    g = [[0] * n for _ in range(n)]
    off = 0
    for L in lattices:
        for i in range(L.rank):
            for j in range(L.rank):
                g[off + i][off + j] = L.gram[i][j]
        off += L.rank
    return EvenLattice(tuple(tuple(r) for r in g))


_TERM_RE = re.compile(
    r"^\s*(?:(\d+)\s*\*\s*)?"          # optional multiplicity k*
    r"(U|A(\d+)|D(\d+)|E8|<\s*(-?\d+)\s*>)"  # U, An, Dn, E8, <2k>
    r"(?:\s*\(\s*(-?\d+)\s*\))?\s*$"   # optional rescale (n)
)


def build_lattice(expr: str) -> EvenLattice:
    """Parse a formal sum like 'U + 2*E8(-1) + <-4> + <-6>' or 'D4(-1)'."""
    parts = expr.split("+")
    pieces: list[EvenLattice] = []
    for part in parts:
        mobj = _TERM_RE.match(part)
        if not mobj:
            raise LatticeError(f"cannot parse lattice term {part.strip()!r}")
        mult = int(mobj.group(1)) if mobj.group(1) else 1
        name = mobj.group(2)
        if name == "U":
            L = hyperbolic_plane()
        elif name == "E8":
            L = root_lattice_E8()
        elif mobj.group(3) is not None:
            L = root_lattice_A(int(mobj.group(3)))
        elif mobj.group(4) is not None:
            L = root_lattice_D(int(mobj.group(4)))
        else:
            L = rank_one(int(mobj.group(5)))
        if mobj.group(6) is not None:
            L = L.rescaled(int(mobj.group(6)))
        pieces.extend([L] * mult)
    return direct_sum(*pieces)


# -- Smith form and discriminant groups ---------------------------------------


def _smith_with_transform(gram) -> tuple[list[int], list[list[Fraction]]]:
    """Invariant factors d_i (>0, divisibility chain) and the matrix S^{-1}
    with D = S G T; columns of S^{-1} generate Z^n/(G Z^n) factorwise."""
    M = sympy.Matrix([list(r) for r in gram])
    D, S, T = smith_normal_decomp(M, domain=sympy.ZZ)
    n = M.rows
    dvals = [int(D[i, i]) for i in range(n)]
    Sinv = S.inv()
    inv = [[Fraction(int(Sinv[i, j].p), int(Sinv[i, j].q)) for j in range(n)] for i in range(n)]
    return [abs(x) for x in dvals], inv


def smith_invariants(L: EvenLattice) -> list[int]:
    """Invariant factors of the Gram matrix, 1s omitted; product = |det|."""
    d, _ = _smith_with_transform(L.gram)
    out = sorted(x for x in d if x > 1)
    assert math.prod(out) == abs(L.det)
    return out


@dataclass(frozen=True)
class FiniteQuadraticForm:
    """Finite abelian group with a Q/2Z-valued quadratic form.

    Elements are exponent tuples over the cyclic generators; q_values maps
    each element to its value reduced into [0, 2).
    """

    invariant_factors: tuple[int, ...]
    q_values: dict[tuple[int, ...], Fraction]

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors) if self.invariant_factors else 1

    def elements(self):
        if not self.invariant_factors:
            return [()]
        return list(itertools.product(*[range(d) for d in self.invariant_factors]))

    def q(self, x: tuple[int, ...]) -> Fraction:
        key = tuple(xi % d for xi, d in zip(x, self.invariant_factors))
        return self.q_values[key]

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def neg(self, x) -> tuple[int, ...]:
        return tuple((-a) % d for a, d in zip(x, self.invariant_factors))

    def bilinear(self, x, y) -> Fraction:
        """b(x, y) = (q(x+y) - q(x) - q(y))/2 in Q/Z, reduced into [0, 1)."""
        val = (self.q(self.add(x, y)) - self.q(x) - self.q(y)) / 2
        return val % 1

    def element_order(self, x) -> int:
        return math.lcm(*(d // math.gcd(d, xi) for xi, d in zip(x, self.invariant_factors))) if x else 1

    def negated(self) -> "FiniteQuadraticForm":
        return FiniteQuadraticForm(
            self.invariant_factors,
            {k: (-v) % 2 for k, v in self.q_values.items()},
        )

    def two_torsion(self) -> list[tuple[int, ...]]:
        return [x for x in self.elements() if all((2 * xi) % d == 0 for xi, d in zip(x, self.invariant_factors))]

    def values_multiset(self) -> tuple[Fraction, ...]:
        return tuple(sorted(self.q_values.values()))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteQuadraticForm)
            and self.invariant_factors == other.invariant_factors
            and self.q_values == other.q_values
        )

    def __hash__(self):
        return hash((self.invariant_factors, tuple(sorted(self.q_values.items()))))


def discriminant_form(L: EvenLattice) -> FiniteQuadraticForm:
    """The quadratic form x.x mod 2Z on L^vee/L, via dual generators."""
    dvals, sinv = _smith_with_transform(L.gram)
    n = L.rank
    gram_inv = _fraction_inverse(L.gram)
    gens = [i for i in range(n) if dvals[i] > 1]
    factors = tuple(dvals[i] for i in gens)
    if math.prod(factors) > GROUP_SIZE_LIMIT:
        raise LatticeError("discriminant group too large for exhaustive treatment")
    # generator i of Z^n/G Z^n is column i of S^{-1}; its dual-lattice vector is G^{-1} * that
    gen_vecs = []
    for i in gens:
        col = [sinv[r][i] for r in range(n)]
        vec = [sum(gram_inv[r][s] * col[s] for s in range(n)) for r in range(n)]
        gen_vecs.append(vec)
    k = len(gens)
    qg = [[_dot(L.gram, gen_vecs[i], gen_vecs[j]) for j in range(k)] for i in range(k)]
    q_values = {}
    for exps in itertools.product(*[range(d) for d in factors]):
        val = Fraction(0)
        for i in range(k):
            if exps[i]:
                val += exps[i] * exps[i] * qg[i][i]
                for j in range(i + 1, k):
                    val += 2 * exps[i] * exps[j] * qg[i][j]
        q_values[exps] = val % 2
    F = FiniteQuadraticForm(factors, q_values)
    _check_bilinear_compatibility(F)
    return F


def _check_bilinear_compatibility(F: FiniteQuadraticForm):
    if F.order > 200:
        return  # exhaustive identity check only for small groups
    for x in F.elements():
        if F.q(F.neg(x)) != F.q(x):
            raise LatticeError("q(-x) != q(x): discriminant form is broken")
        for y in F.elements():
            lhs = (F.q(F.add(x, y)) - F.q(x) - F.q(y)) % 2
            if lhs != (2 * F.bilinear(x, y)) % 2:
                raise LatticeError("bilinear compatibility fails")


def _fraction_inverse(gram) -> list[list[Fraction]]:
    n = len(gram)
    a = [[Fraction(gram[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _dot(gram, v, w) -> Fraction:
    n = len(gram)
    return sum(v[i] * gram[i][j] * w[j] for i in range(n) for j in range(n))


# -- isomorphism of finite quadratic forms -------------------------------------


def disc_forms_isomorphic(
    F1: FiniteQuadraticForm, F2: FiniteQuadraticForm
) -> Optional[dict[tuple[int, ...], tuple[int, ...]]]:
    """A group isomorphism preserving q, as a generator-image map, or None."""
    if F1.invariant_factors != F2.invariant_factors:
        return None
    if F1.order > GROUP_SIZE_LIMIT:
        raise LatticeError("groups too large for exhaustive isomorphism search")
    factors = F1.invariant_factors
    k = len(factors)
    if k == 0:
        return {}
    gens1 = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    elements2 = F2.elements()
    candidates = []
    for i, g in enumerate(gens1):
        cands = [h for h in elements2 if F2.element_order(h) == factors[i] and F2.q(h) == F1.q(g)]
        if not cands:
            return None
        candidates.append(cands)

    target_b = [[F1.bilinear(gens1[i], gens1[j]) for j in range(k)] for i in range(k)]

    def is_bijective(chosen: list) -> bool:
        images = set()
        for exps in itertools.product(*[range(d) for d in factors]):
            img = tuple(
                sum(e * ch[t] for e, ch in zip(exps, chosen)) % factors[t] for t in range(k)
            )
            images.add(img)
        return len(images) == F2.order

    def backtrack(idx: int, chosen: list):
        if idx == k:
            return list(chosen) if is_bijective(chosen) else None
        for cand in candidates[idx]:
            if all(F2.bilinear(cand, chosen[j]) == target_b[idx][j] for j in range(idx)):
                res = backtrack(idx + 1, chosen + [cand])
                if res is not None:
                    return res
        return None

    images = backtrack(0, [])
    if images is None:
        return None
    return {g: img for g, img in zip(gens1, images)}


def forms_match(F1: FiniteQuadraticForm, F2: FiniteQuadraticForm, sign: int = 1):
    return disc_forms_isomorphic(F1, F2 if sign == 1 else F2.negated())


# -- rank-2 recovery -----------------------------------------------------------


def is_two_divisible(Q: BinaryQuadraticForm) -> tuple[bool, Optional[BinaryQuadraticForm]]:
    """Q = Q'(2) for an even form Q' iff the classical triple is all even."""
    if Q.a % 2 == 0 and Q.b % 2 == 0 and Q.c % 2 == 0:
        return True, BinaryQuadraticForm(Q.a // 2, Q.b // 2, Q.c // 2)
    return False, None


def all_reduced_forms(d: int) -> list[BinaryQuadraticForm]:
    """Reduced forms of discriminant d, primitive and imprimitive."""
    out = []
    k = 1
    while k * k <= -d // 3:
        if d % (k * k) == 0:
            d0 = d // (k * k)
            if d0 % 4 in (0, 1):
                out.extend(Q.scaled(k) for Q in reduced_forms(d0, primitive_only=True))
        k += 1
    out.sort()
    return out


def rank2_forms_by_disc_form(
    d: int, target: FiniteQuadraticForm, sign: int = 1
) -> list[BinaryQuadraticForm]:
    """Reduced even rank-2 forms of discriminant d whose discriminant form
    matches sign * target."""
    if d >= 0:
        raise LatticeError("need a negative discriminant")
    goal = target if sign == 1 else target.negated()
    out = []
    for Q in all_reduced_forms(d):
        F = discriminant_form(from_form(Q))
        if disc_forms_isomorphic(F, goal) is not None:
            out.append(Q)
    return out


# -- overlattices --------------------------------------------------------------


def overlattice(L: EvenLattice, glue: Sequence[Sequence[Fraction]]) -> tuple[EvenLattice, int]:
    """Even integral overlattice generated by L and rational glue vectors.

    Vectors are in L-coordinates.  Raises if the result is not an even
    integral lattice.  Returns the new lattice and the index [M : L].
    """
    n = L.rank
    den = 1
    for row in glue:
        for x in row:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    cols = []
    for i in range(n):
        cols.append([den * int(i == j) for j in range(n)])
    for row in glue:
        cols.append([int(Fraction(x) * den) for x in row])
    M = sympy.Matrix(cols).T  # columns = generators, scaled by den
    H = hermite_normal_form(M)
    if H.shape[1] != n:
        raise LatticeError("overlattice generators do not span full rank")
    B = [[Fraction(int(H[i, j]), den) for j in range(H.shape[1])] for i in range(n)]
    # Gram' = B^T G B with columns of B as basis vectors
    gram_new = [[None] * n for _ in range(n)]
    for i in range(n):
        vi = [B[r][i] for r in range(n)]
        for j in range(i, n):
            vj = [B[r][j] for r in range(n)]
            val = _dot(L.gram, vi, vj)
            if val.denominator != 1:
                raise LatticeError("glue vectors do not generate an integral lattice")
            gram_new[i][j] = gram_new[j][i] = int(val)
    for i in range(n):
        if gram_new[i][i] % 2:
            raise LatticeError("overlattice is integral but not even")
    Mnew = EvenLattice(tuple(tuple(r) for r in gram_new))
    index2 = Fraction(abs(L.det), abs(Mnew.det))
    idx = sqrt_int(index2)
    if idx is None:
        raise LatticeError("index inconsistency in overlattice")
    return Mnew, idx


def sqrt_int(x: Fraction) -> Optional[int]:
    if x.denominator != 1 or x < 0:
        return None
    r = math.isqrt(x.numerator)
    return r if r * r == x.numerator else None
