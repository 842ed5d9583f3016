"""Conjugation-invariant measures on subgroup lattices and exact inequality checks.

A finitely supported probability measure on the subgroups of an enumerable
ambient group stands in for an invariant random subgroup.  All probabilities
and expectations are exact ``fractions.Fraction`` values: the inequalities
checked here can be tight, and floating point would manufacture spurious
failures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .perm import (
    GeneratedGroup,
    Perm,
    compose,
    conjugate,
    identity,
    restrict,
    rigid_stabilizer,
    symmetric_group,
)


class NotASubgroup(ValueError):
    pass


class NotConjInvariant(ValueError):
    pass


class BadFactorization(ValueError):
    """The side partition is not invariant under the ambient group."""


class BadTransporterSet(ValueError):
    """An element of Q fails to carry U onto V."""


PartialMap = tuple[int, ...]  # images of sorted(U), as raw points


def restriction_map(p: Perm, U: tuple[int, ...]) -> PartialMap:
    """The partial map p|_U, encoded as images along sorted(U)."""
    return tuple(p[x] for x in U)


@dataclass(frozen=True)
class Transporter:
    """Elements of H carrying U onto V, with their deduplicated restrictions."""

    H: GeneratedGroup
    U: tuple[int, ...]
    V: tuple[int, ...]
    elements: tuple[Perm, ...]
    restrictions: tuple[PartialMap, ...]


def transporter(H: GeneratedGroup, U, V) -> Transporter:
    U = tuple(sorted(U))
    V = tuple(sorted(V))
    if U != V and set(U) & set(V):
        raise ValueError("U and V must be disjoint or equal")
    Vset = set(V)
    els = tuple(h for h in H.elements if {h[x] for x in U} == Vset)
    restrictions = tuple(sorted({restriction_map(h, U) for h in els}))
    return Transporter(H, U, V, els, restrictions)


@dataclass(frozen=True)
class ConjInvariantMeasure:
    """A finitely supported measure on subgroups of ``ambient``.

    Subgroups in the support are deduplicated by element set; weights are
    exact and sum to one.  Conjugation invariance is checked on generators of
    the ambient group (which generate all inner automorphisms).
    """

    ambient: GeneratedGroup
    support: tuple[tuple[GeneratedGroup, Fraction], ...]

    def __post_init__(self):
        total = sum(w for _, w in self.support)
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")

    def check_invariance(self) -> None:
        weights = {H.element_set: w for H, w in self.support}
        for g in self.ambient.generators:
            for H, w in self.support:
                key = frozenset(conjugate(h, g) for h in H.elements)
                if weights.get(key) != w:
                    raise NotConjInvariant(
                        f"support not closed under conjugation by {g}")

    def expectation(self, fn) -> Fraction:
        return sum((w * fn(H) for H, w in self.support), Fraction(0))


def point_mass(H: GeneratedGroup, ambient: GeneratedGroup) -> ConjInvariantMeasure:
    if not H.is_subgroup_of(ambient):
        raise NotASubgroup("H is not a subgroup of the ambient group")
    return ConjInvariantMeasure(ambient, ((H, Fraction(1)),))


def uniform_conjugate_measure(gamma: GeneratedGroup,
                              ambient: GeneratedGroup) -> ConjInvariantMeasure:
    """Uniform measure over the distinct ambient-conjugates of gamma."""
    if not gamma.is_subgroup_of(ambient):
        raise NotASubgroup("gamma is not a subgroup of the ambient group")
    seen: dict[frozenset, GeneratedGroup] = {}
    for g in ambient.elements:
        els = tuple(sorted(conjugate(h, g) for h in gamma.elements))
        key = frozenset(els)
        if key not in seen:
            seen[key] = GeneratedGroup(gamma.degree, els, gamma.cap, _elements=els)
    conjs = [seen[k] for k in sorted(seen, key=lambda k: tuple(sorted(k)))]
    w = Fraction(1, len(conjs))
    return ConjInvariantMeasure(ambient, tuple((H, w) for H in conjs))


def stabilizer_measure(ambient: GeneratedGroup) -> ConjInvariantMeasure:
    """Pushforward of the uniform measure on points under x -> St(x)."""
    counts: dict[frozenset, tuple[GeneratedGroup, int]] = {}
    for x in range(ambient.degree):
        els = tuple(sorted(h for h in ambient.elements if h[x] == x))
        key = frozenset(els)
        if key in counts:
            H, c = counts[key]
            counts[key] = (H, c + 1)
        else:
            counts[key] = (GeneratedGroup(ambient.degree, els, ambient.cap,
                                          _elements=els), 1)
    items = [counts[k] for k in sorted(counts, key=lambda k: tuple(sorted(k)))]
    return ConjInvariantMeasure(
        ambient, tuple((H, Fraction(c, ambient.degree)) for H, c in items))


@dataclass(frozen=True)
class VerifyResult:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def _restricted_perm_set(elements, U) -> frozenset:
    return frozenset(restrict(p, U) for p in elements)


def verify_E1(mu: ConjInvariantMeasure, U, V, A) -> VerifyResult:
    """Check the subgroup-index inequality for the event {H|_{U->V} meets A}.

    lhs = P(restrictions of H carrying U to V meet A);
    rhs = E[ min(|A| / [R(U) : H|_{U->U} n R(U)], 1) on the event that H
    carries U onto V ], with both groups in the index viewed as permutation
    groups of U.  Exact rationals throughout.
    """
    U = tuple(sorted(U))
    V = tuple(sorted(V))
    if not U or not V or set(U) & set(V):
        raise ValueError("U, V must be disjoint and non-empty")
    mu.check_invariance()
    A = {tuple(a) for a in A}
    ambient_T = transporter(mu.ambient, U, V)
    if not A <= set(ambient_T.restrictions):
        raise ValueError("A must consist of restrictions of ambient transporter elements")

    RU = _restricted_perm_set(rigid_stabilizer(mu.ambient, U).elements, U)
    lhs = Fraction(0)
    rhs = Fraction(0)
    for H, w in mu.support:
        tv = transporter(H, U, V)
        if not tv.elements:
            continue  # empty transporter: no lhs mass, indicator kills rhs term
        if A & set(tv.restrictions):
            lhs += w
        barHUU = _restricted_perm_set(transporter(H, U, U).elements, U)
        meet = RU & barHUU
        index = Fraction(len(RU), len(meet))
        rhs += w * min(Fraction(len(A)) / index, Fraction(1))
    return VerifyResult(lhs, rhs, lhs <= rhs)


def verify_index(gamma: GeneratedGroup, Q, U, V,
                 ambient: GeneratedGroup | None = None) -> VerifyResult:
    """Check P(random Sym(X)-conjugate of gamma meets Q) <= |gamma| |Q_U| / |U|!.

    Q must consist of permutations carrying U onto V; Q_U is the set of their
    restrictions to U, deduplicated.
    """
    U = tuple(sorted(U))
    V = tuple(sorted(V))
    Q = [tuple(q) for q in Q]
    Vset = set(V)
    for q in Q:
        if {q[x] for x in U} != Vset:
            raise BadTransporterSet(f"element does not carry U onto V: {q}")
    if ambient is None:
        ambient = symmetric_group(gamma.degree, cap=max(gamma.cap, factorial(gamma.degree)))
    nu = uniform_conjugate_measure(gamma, ambient)
    Qset = set(Q)
    lhs = nu.expectation(lambda H: Fraction(1) if Qset & H.element_set else Fraction(0))
    QU = {restriction_map(q, U) for q in Q}
    rhs = Fraction(gamma.order * len(QU), factorial(len(U)))
    return VerifyResult(lhs, rhs, lhs <= rhs)


def _side_restriction_group(elements, side, degree, cap) -> GeneratedGroup:
    els = tuple(sorted({restrict(p, side) for p in elements}))
    return GeneratedGroup(len(side), els, cap, _elements=els)


def verify_E2(mu: ConjInvariantMeasure, side1, side2, B) -> VerifyResult:
    """Check the conjugacy-class-size inequality in a product of two groups.

    The ambient group of ``mu`` must preserve the partition side1 | side2 and
    play the role of the full product L1 x L2: the inequality needs measures
    invariant under conjugation by L1 x {id}, which uniform-on-conjugates
    measures over the product ambient are.  For each subgroup H in the
    support, H_1 is the part of H acting trivially on side2, N_1 the
    normalizer of its side-1 restriction inside the side-1 restriction of the
    ambient, and the bound counts N_1-conjugates of the coset-like set
    pi_1(B) H_1.
    """
    side1 = tuple(sorted(side1))
    side2 = tuple(sorted(side2))
    amb = mu.ambient
    if sorted(side1 + side2) != list(range(amb.degree)):
        raise BadFactorization("side1, side2 must partition the points")
    s1set = set(side1)
    for g in amb.generators:
        if any((g[x] in s1set) != (x in s1set) for x in range(amb.degree)):
            raise BadFactorization("ambient group mixes the two sides")
    mu.check_invariance()
    B = [tuple(b) for b in B]
    for b in B:
        if b not in amb:
            raise ValueError("B must be a subset of the ambient group")

    L1 = _side_restriction_group(amb.elements, side1, amb.degree, amb.cap)
    pi2B = {restrict(b, side2) for b in B}
    Bset = set(B)

    lhs = Fraction(0)
    rhs = Fraction(0)
    for H, w in mu.support:
        if Bset <= H.element_set:
            lhs += w
        pi2H = {restrict(h, side2) for h in H.elements}
        if not pi2B <= pi2H:
            continue
        H1 = frozenset(restrict(h, side1) for h in H.elements
                       if all(h[x] == x for x in side2))
        N1 = [n for n in L1.elements
              if frozenset(conjugate(h, n) for h in H1) == H1]
        S = frozenset(compose(restrict(b, side1), h) for b in B for h in H1)
        classes = {frozenset(conjugate(s, n) for s in S) for n in N1}
        rhs += w * Fraction(1, len(classes))
    return VerifyResult(lhs, rhs, lhs <= rhs)
