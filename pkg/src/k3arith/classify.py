"""Classification of singular K3 surfaces and their Enriques quotients.

Everything is driven by the transcendental-lattice form: CM points and
j-values give the Inose-pencil data, class-group structure decides which
surfaces admit an Enriques involution of base-change type, and the ring
class fields H(d), H(4d) organize the fields of definition.  Verdicts carry
a `rule` string naming the criterion they instantiate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import cm
from .cm import CMPoint, JValue, cm_point_of_form, j_cm
from .ellsurf import WeierstrassModel
from .forms import (
    BinaryQuadraticForm,
    FormError,
    class_group,
    class_number,
    genus_info,
    kronecker_at_2,
    principal_form,
    reduce_form,
    two_torsion_scan,
    is_two_torsion_discriminant,
)
from .funcfield import Poly
from .lattices import EvenLattice, build_lattice, is_two_divisible

TWO_TORSION_SCAN_BOUND = 7392
# One further two-torsion discriminant of size > 10^10 is not excluded
# unconditionally; it is ruled out under ERH for odd real characters.
SCAN_CAVEAT = (
    "two-torsion list certified for |d| <= 7392; a single further discriminant "
    "beyond 10^10 is excluded only under ERH"
)


# -- CM data -------------------------------------------------------------------


@dataclass(frozen=True)
class CMPair:
    tau: CMPoint
    tau_prime: CMPoint
    e_isomorphic_eprime: bool


def cm_points(Q: BinaryQuadraticForm) -> CMPair:
    """tau = (-b + sqrt d)/(2a) and tau' = (b + sqrt d)/2; the product
    E_tau x E_tau' realizes the form as a transcendental lattice."""
    if not Q.is_primitive():
        raise FormError("CM points need a primitive form; route imprimitive forms through the Kummer report")
    d = Q.discriminant()
    tau = CMPoint(-Q.b, 1, 2 * Q.a, d)
    tau_prime = CMPoint(Q.b, 1, 2, d)
    iso = reduce_form(Q).form == reduce_form(principal_form(d)).form
    return CMPair(tau, tau_prime, iso)


# -- Inose pencil ---------------------------------------------------------------


@dataclass(frozen=True)
class InoseData:
    a_cubed: object  # Fraction when exact (h(d) = 1), else mpmath complex
    b_squared: object
    exact: bool
    mw_rank: int
    extra_fibers: str  # none | I2 | 2I2 | IV
    e_isomorphic_eprime: bool
    model: Optional[WeierstrassModel]  # emitted only when coefficients are rational


def inose_pencil(Q: BinaryQuadraticForm, precision_bits: int = 256) -> InoseData:
    """Coefficient data A^3 = j j'/12^6, B^2 = (1 - j/12^3)(1 - j'/12^3) of the
    elliptic model with two II* fibers, plus its Mordell-Weil rank and extra
    reducible fibers (decided class-theoretically)."""
    if not Q.is_primitive():
        raise FormError("Inose data needs a primitive form")
    pair = cm_points(Q)
    d = Q.discriminant()
    h = class_number(d)
    # the j-special rows occur exactly at d = -3 (j = 0) and d = -4 (j = 12^3)
    if pair.e_isomorphic_eprime and d == -3:
        rank, extra = 0, "IV"
    elif pair.e_isomorphic_eprime and d == -4:
        rank, extra = 0, "2I2"
    elif pair.e_isomorphic_eprime:
        rank, extra = 1, "I2"
    else:
        rank, extra = 2, "none"
    if h == 1:
        jv = j_cm(pair.tau, precision_bits)
        if jv.certified is None:
            raise cm.PrecisionError(f"j-value for d={d} did not certify")
        j = Fraction(jv.certified)
        a3 = (j / 1728) ** 2
        b2 = (1 - j / 1728) ** 2
        model = _rational_inose_model(a3, b2)
        return InoseData(a3, b2, True, rank, extra, True, model)
    j1 = j_cm(pair.tau, precision_bits).value
    j2 = j_cm(pair.tau_prime, precision_bits).value
    a3 = j1 * j2 / 12**6
    b2 = (1 - j1 / 12**3) * (1 - j2 / 12**3)
    return InoseData(a3, b2, False, rank, extra, pair.e_isomorphic_eprime, None)


def _rational_inose_model(a3: Fraction, b2: Fraction) -> WeierstrassModel:
    """Weierstrass model over Q of the pencil with two II* fibers.

    For A^3 * B^2 != 0 the coefficients only involve A^3 and B^2:
        y^2 = x^3 - 3 B^2 A^3 t^4 x + B^2 A^3 t^5 (B^2 t^2 - 2 B^2 t + 1),
    a constant twist and Moebius rescaling of the A, B form.  The degenerate
    cases d = -3, -4 have A = 0, B = 1 resp. A = 1, B = 0 on the nose.
    """
    zero = Poly([])
    if a3 == 0:  # j = 0
        a4 = zero
        a6 = Poly([0, 0, 0, 0, 0, 1, -2, 1])  # t^5 (t^2 - 2t + 1), B = 1
    elif b2 == 0:  # j = 12^3
        a4 = Poly([0, 0, 0, 0, -3 * a3])  # A = 1 here (a3 = 1)
        a6 = Poly([0, 0, 0, 0, 0, 1, 0, 1])  # t^5 (t^2 + 1)
    else:
        c = a3 * b2
        a4 = Poly([0, 0, 0, 0, -3 * c])
        a6 = Poly([0, 0, 0, 0, 0, c, -2 * c * b2, c * b2])
    return WeierstrassModel(zero, zero, zero, a4, a6)


# -- Enriques admissibility -------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    value: object
    rule: str


def enriques_admissible(Q: BinaryQuadraticForm) -> Verdict:
    """Which singular K3 surfaces carry an Enriques involution (Sertoz's
    lattice-theoretic criterion; Keum covers the Kummer case diag(4,4))."""
    R = reduce_form(Q).form
    d = R.discriminant()
    if d % 8 == 5:  # d = -3 mod 8 (d is negative)
        return Verdict(False, "excluded: d = -3 mod 8")
    if d in (-4, -8):
        return Verdict(False, "excluded: d in {-4, -8}")
    if d == -16 and R == BinaryQuadraticForm(1, 0, 4):
        return Verdict(False, "excluded: d = -16 with Q = diag(2,8) (the non-Kummer surface)")
    if d == -16:
        return Verdict(True, "admissible: Km(E_i x E_i) with diag(4,4) (Keum)")
    return Verdict(True, "admissible: not in the excluded list")


def base_change_enriques(Q: BinaryQuadraticForm) -> Verdict:
    """Existence of an Enriques involution of base-change type on the Inose
    pencil, with the Kummer surface as Nikulin quotient.

    Odd d: works iff d = -7 mod 8 (rank-1 pencil, section parity).  Even d:
    works unless the form is the principal one of a two-torsion class group
    (then no rank-2 pencil on a non-isomorphic CM pair exists).
    """
    adm = enriques_admissible(Q)
    if not adm.value:
        return Verdict("no", adm.rule)
    R = reduce_form(Q).form
    d = R.discriminant()
    if d % 2:
        # admissible odd discriminants satisfy d = -7 = 1 mod 8
        assert d % 8 == 1
        if R.is_primitive() and R == reduce_form(principal_form(d)).form and is_two_torsion_discriminant(d):
            rule = "yes: rank-1 pencil, section meets the I2 fiber off the identity (odd d = -7 mod 8)"
        else:
            rule = "yes: rank-2 pencil on a non-isomorphic CM pair (odd d = -7 mod 8)"
        return Verdict("yes", rule)
    if R == _exception_shape(d) and is_two_torsion_discriminant(d):
        return Verdict(
            "exception",
            "exception: Q = diag(2,|d|/2) with two-torsion class group; no rank-2 pencil exists",
        )
    return Verdict("yes", "yes: rank-2 pencil on a non-isomorphic CM pair (even d)")


def _exception_shape(d: int) -> Optional[BinaryQuadraticForm]:
    if d % 4 == 0:
        return BinaryQuadraticForm(1, 0, -d // 4)
    return None


def exception_list(bound: int = TWO_TORSION_SCAN_BOUND) -> list[BinaryQuadraticForm]:
    """The even two-torsion discriminants (minus -4, -8, -16) as principal
    forms diag(2, |d|/2); 62 surfaces for the certified scan bound."""
    out = []
    for d in two_torsion_scan(bound):
        if d % 2 == 0 and d not in (-4, -8, -16):
            out.append(BinaryQuadraticForm(1, 0, -d // 4))
    return out


# -- fields of definition ----------------------------------------------------------


@dataclass(frozen=True)
class FieldReport:
    d: int
    class_number: int
    deg_hk: int  # [H(d) : K] = h(d)
    deg_h4d_over_hd: int  # 1, 2, or 3 per the Legendre symbol at 2
    genus_size: int
    kummer_disc: int  # 4d
    genus_divides_degree: str  # divisibility bound for any field of definition


def fields_report(Q: BinaryQuadraticForm) -> FieldReport:
    if not Q.is_primitive():
        raise FormError("field report needs a primitive form (use the half form)")
    d = Q.discriminant()
    h = class_number(d)
    gi = genus_info(Q)
    sym = kronecker_at_2(d)
    if sym == 1 or d in (-3, -4):
        deg = 1
    elif d % 2 == 0:
        deg = 2
    else:
        deg = 3
    return FieldReport(
        d=d,
        class_number=h,
        deg_hk=h,
        deg_h4d_over_hd=deg,
        genus_size=gi.genus_size,
        kummer_disc=4 * d,
        genus_divides_degree=f"#genus(T) = {gi.genus_size} divides deg_K(L) for any field of definition L",
    )


# -- Kummer sandwich ------------------------------------------------------------------


@dataclass(frozen=True)
class KummerSandwich:
    kummer_form: BinaryQuadraticForm  # T(X') = T(X)(2)
    kummer_disc: int  # 4d
    is_kummer: bool  # T(X) itself two-divisible
    half_form: Optional[BinaryQuadraticForm]


def kummer_sandwich(Q: BinaryQuadraticForm) -> KummerSandwich:
    """The quadratic base change sandwich: X dominates and is dominated by the
    Kummer surface with transcendental lattice T(X)(2)."""
    doubled = Q.scaled(2)
    two_div, half = is_two_divisible(Q)
    return KummerSandwich(doubled, 4 * Q.discriminant(), two_div, half)


# -- Brauer-group example lattice -----------------------------------------------------


@dataclass(frozen=True)
class BrauerExample:
    M: int
    N: int
    d: int
    ns_lattice: EvenLattice
    notes: tuple[str, ...]


def brauer_example(M: int, N: int) -> BrauerExample:
    """NS = U + 2E8(-1) + <-4M> + <-2N> with N > 1 odd: the section of height
    4M induces an Enriques involution and the orthogonal height-2N section is
    anti-invariant, so the Brauer group of the quotient pulls back to zero."""
    if N <= 1 or N % 2 == 0:
        raise ValueError("need N odd and > 1")
    if M < 1:
        raise ValueError("need M >= 1")
    L = build_lattice(f"U + 2*E8(-1) + <{-4 * M}> + <{-2 * N}>")
    d = -8 * M * N
    assert L.det == d
    notes = (
        f"section of height {4 * M} induces the Enriques involution",
        f"orthogonal section of height {2 * N} is anti-invariant for it",
        "pullback of the Brauer group of the quotient vanishes",
    )
    return BrauerExample(M, N, d, L, notes)


# -- the thirteen surfaces over Q ------------------------------------------------------


def class_number_one_discriminants() -> list[int]:
    """Discriminants of class number one; these index the singular K3
    surfaces whose Neron-Severi group is defined over Q (13 of them)."""
    from .forms import class_number_one_discriminants as scan

    return list(scan())


# -- aggregated report ------------------------------------------------------------------


@dataclass(frozen=True)
class K3EnriquesReport:
    form: BinaryQuadraticForm
    d: int
    is_kummer: bool
    enriques_admissible: bool
    admissible_rule: str
    base_change_involution: str  # yes | no | exception
    base_change_rule: str
    exception_flag: bool
    inose: Optional[InoseData]
    fields: Optional[FieldReport]
    sandwich: KummerSandwich
    ns_over: str
    enriques_ns_over: Optional[dict]
    notes: tuple[str, ...] = field(default_factory=tuple)


def enriques_report(Q: BinaryQuadraticForm, precision_bits: int = 256) -> K3EnriquesReport:
    """Everything the toolkit knows about the singular K3 surface with
    transcendental lattice Q and its potential Enriques quotients."""
    R = reduce_form(Q).form
    d = R.discriminant()
    adm = enriques_admissible(R)
    bc = base_change_enriques(R)
    sandwich = kummer_sandwich(R)
    notes = []
    if R.is_primitive():
        inose = inose_pencil(R, precision_bits)
        fields = fields_report(R)
    else:
        inose = None
        fields = None
        notes.append(
            "imprimitive transcendental lattice: CM orders of the two factors differ; rank-2 pencil"
        )
        if sandwich.is_kummer:
            half = sandwich.half_form
            notes.append(f"Kummer surface of the abelian surface with form {half}")
    enriques_ns = None
    if adm.value:
        enriques_ns = {
            "field": "H(4d)",
            "conjectural": True,
            "supporting_fact": "the ramification datum B = sqrt((1-j/12^3)(1-j'/12^3)) lies in H(4d) (Schertz)",
        }
    if bc.value == "exception":
        notes.append(SCAN_CAVEAT)
    return K3EnriquesReport(
        form=R,
        d=d,
        is_kummer=sandwich.is_kummer,
        enriques_admissible=bool(adm.value),
        admissible_rule=adm.rule,
        base_change_involution=str(bc.value),
        base_change_rule=bc.rule,
        exception_flag=bc.value == "exception",
        inose=inose,
        fields=fields,
        sandwich=sandwich,
        ns_over="H(d)",
        enriques_ns_over=enriques_ns,
        notes=tuple(notes),
    )
