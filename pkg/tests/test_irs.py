import itertools
from fractions import Fraction

import pytest

from treeirs.irs import (
    BadFactorization,
    BadTransporterSet,
    ConjInvariantMeasure,
    NotASubgroup,
    point_mass,
    restriction_map,
    stabilizer_measure,
    transporter,
    uniform_conjugate_measure,
    verify_E1,
    verify_E2,
    verify_index,
)
from treeirs.perm import (
    GeneratedGroup,
    alternating_group,
    close,
    from_cycles,
    identity,
    product_of_symmetric,
    subgroups_of,
    symmetric_group,
)


def test_uniform_conjugate_measure_examples():
    s4 = symmetric_group(4)
    # normal subgroup: point mass
    mu = uniform_conjugate_measure(s4, s4)
    assert len(mu.support) == 1 and mu.support[0][1] == 1

    gamma = GeneratedGroup(4, [from_cycles(4, (0, 1), (2, 3))])
    mu = uniform_conjugate_measure(gamma, s4)
    assert len(mu.support) == 3
    assert all(w == Fraction(1, 3) for _, w in mu.support)
    mu.check_invariance()

    triv = GeneratedGroup(4, [])
    mu = uniform_conjugate_measure(triv, s4)
    assert len(mu.support) == 1


def test_uniform_conjugate_measure_not_a_subgroup():
    with pytest.raises(NotASubgroup):
        uniform_conjugate_measure(symmetric_group(3), alternating_group(3))


def test_conjugation_invariance_exhaustive_small():
    for degree in (2, 3, 4, 5):
        from treeirs.perm import enumerate_subgroups
        subs, _ = enumerate_subgroups(degree)
        amb = symmetric_group(degree)
        for G in subs:
            uniform_conjugate_measure(G, amb).check_invariance()


def test_stabilizer_measure_sym3():
    mu = stabilizer_measure(symmetric_group(3))
    assert len(mu.support) == 3
    assert all(w == Fraction(1, 3) and H.order == 2 for H, w in mu.support)
    mu.check_invariance()


def test_stabilizer_measure_trivial_group():
    triv = GeneratedGroup(4, [])
    mu = stabilizer_measure(triv)
    assert len(mu.support) == 1
    assert mu.support[0][0].order == 1


def test_stabilizer_measure_regular_action():
    # C4 acting on itself: free action, stabilizers trivial
    c4 = GeneratedGroup(4, [from_cycles(4, (0, 1, 2, 3))])
    mu = stabilizer_measure(c4)
    assert len(mu.support) == 1
    assert mu.support[0][0].order == 1


def test_stabilizer_measure_equals_conjugates_of_point_stabilizer():
    for G in (symmetric_group(4), alternating_group(4),
              GeneratedGroup(4, [from_cycles(4, (0, 1, 2, 3))])):
        mu = stabilizer_measure(G)
        st0 = [H for H, _ in mu.support if all(h[0] == 0 for h in H.elements)]
        nu = uniform_conjugate_measure(st0[0], G)
        assert {H.element_set: w for H, w in mu.support} == \
               {H.element_set: w for H, w in nu.support}


def test_transporter_examples():
    s3 = symmetric_group(3)
    t = transporter(s3, (0,), (1,))
    assert set(t.elements) == {from_cycles(3, (0, 1)), from_cycles(3, (0, 1, 2))}
    assert t.restrictions == ((1,),)

    t2 = transporter(s3, (0,), (0,))
    assert set(t2.elements) == {identity(3), from_cycles(3, (1, 2))}

    triv = GeneratedGroup(3, [])
    assert transporter(triv, (0,), (1,)).elements == ()


def test_verify_e1_point_mass_full_group():
    s4 = symmetric_group(4)
    mu = point_mass(s4, s4)
    A = transporter(s4, (0,), (1,)).restrictions
    res = verify_E1(mu, (0,), (1,), A)
    assert res.holds and res.lhs == 1


def test_verify_e1_point_mass_trivial():
    s4 = symmetric_group(4)
    mu = point_mass(GeneratedGroup(4, []), s4)
    A = transporter(s4, (0,), (1,)).restrictions
    res = verify_E1(mu, (0,), (1,), A)
    assert res.lhs == 0 and res.holds


def test_verify_e1_c4_example():
    s4 = symmetric_group(4)
    gamma = GeneratedGroup(4, [from_cycles(4, (0, 1, 2, 3))])
    mu = uniform_conjugate_measure(gamma, s4)
    res = verify_E1(mu, (0,), (1,), [(1,)])
    assert res.holds
    # oracle: of the 3 conjugates of C4, those containing an element sending
    # 0 to 1 -- enumerate directly
    hits = sum(1 for H, _ in mu.support if any(h[0] == 1 for h in H.elements))
    assert res.lhs == Fraction(hits, len(mu.support))


def test_verify_e1_rejects_bad_A():
    s4 = symmetric_group(4)
    mu = point_mass(s4, s4)
    with pytest.raises(ValueError):
        verify_E1(mu, (0,), (1,), [(2,)])  # 0 -> 2 is not a U->V restriction


def test_verify_index_examples():
    s4 = symmetric_group(4)
    gamma = GeneratedGroup(4, [from_cycles(4, (0, 1), (2, 3))])

    res = verify_index(gamma, [], (0,), (1,))
    assert res.lhs == 0 and res.holds

    res = verify_index(gamma, [from_cycles(4, (0, 1), (2, 3))], (0,), (1,))
    assert res.lhs == Fraction(1, 3)
    assert res.rhs == 2
    assert res.holds

    res = verify_index(s4, [from_cycles(4, (0, 2), (1, 3))], (0, 1), (2, 3))
    assert res.rhs == Fraction(24 * 1, 2)
    assert res.holds


def test_verify_index_bad_q():
    gamma = GeneratedGroup(4, [from_cycles(4, (0, 1), (2, 3))])
    with pytest.raises(BadTransporterSet):
        verify_index(gamma, [identity(4)], (0,), (1,))


def _diagonal_group(gens3):
    """{(g, g)} acting on 0-2 and 3-5."""
    degree = 6
    out = []
    for g in gens3:
        out.append(tuple(list(g) + [x + 3 for x in g]))
    return GeneratedGroup(degree, out)


def test_verify_e2_singleton_identity():
    amb = product_of_symmetric([2, 3])
    mu = uniform_conjugate_measure(GeneratedGroup(5, [from_cycles(5, (0, 1))]), amb)
    res = verify_E2(mu, (0, 1), (2, 3, 4), [identity(5)])
    assert res.lhs == 1 and res.rhs == 1 and res.holds


def test_verify_e2_full_product_point_mass():
    amb = product_of_symmetric([2, 3])
    mu = point_mass(amb, amb)
    for b in amb.elements:
        res = verify_E2(mu, (0, 1), (2, 3, 4), [b])
        assert res.lhs == 1 and res.rhs == 1 and res.holds


def test_verify_e2_diagonal_in_full_product():
    # ambient: Sym(3) x Sym(3); measure: uniform over product-conjugates of the
    # diagonal Alt(3).  Alt(3) is abelian with centralizer Alt(3) in Sym(3), so
    # there are exactly two twisted diagonals: {(a, a)} and {(a, a^-1)}.
    amb = product_of_symmetric([3, 3])
    diag_a3 = _diagonal_group([from_cycles(3, (0, 1, 2))])
    mu = uniform_conjugate_measure(diag_a3, amb)
    assert len(mu.support) == 2
    b = tuple(list(from_cycles(3, (0, 1, 2))) + [x + 3 for x in from_cycles(3, (0, 1, 2))])
    res = verify_E2(mu, (0, 1, 2), (3, 4, 5), [b])
    assert res.lhs == Fraction(1, 2)
    assert res.rhs == Fraction(1, 2)
    assert res.holds


def test_verify_e2_needs_product_ambient_invariance():
    # With the diagonal subgroup itself as ambient, the point mass on the
    # diagonal Alt(3) is conjugation-invariant, yet the conjugacy-class bound
    # fails: 1 > 1/2.  The inequality genuinely requires invariance under the
    # full product, which is what uniform-on-product-conjugates provides.
    diag_s3 = _diagonal_group([from_cycles(3, (0, 1)), from_cycles(3, (0, 1, 2))])
    diag_a3 = _diagonal_group([from_cycles(3, (0, 1, 2))])
    mu = point_mass(diag_a3, diag_s3)
    mu.check_invariance()
    b = tuple(list(from_cycles(3, (0, 1, 2))) + [x + 3 for x in from_cycles(3, (0, 1, 2))])
    res = verify_E2(mu, (0, 1, 2), (3, 4, 5), [b])
    assert res.lhs == 1 and res.rhs == Fraction(1, 2)
    assert not res.holds


def test_verify_e2_bad_factorization():
    s4 = symmetric_group(4)
    mu = point_mass(s4, s4)
    with pytest.raises(BadFactorization):
        verify_E2(mu, (0, 1), (2, 3), [identity(4)])


def test_verify_e2_product_sweep_smoke():
    # small slice of the exhaustive acceptance sweep
    amb = product_of_symmetric([2, 3])
    subs = subgroups_of(amb)
    for lam in subs[:6]:
        mu = uniform_conjugate_measure(lam, amb)
        for b in lam.elements:
            res = verify_E2(mu, (0, 1), (2, 3, 4), [b])
            assert res.holds
