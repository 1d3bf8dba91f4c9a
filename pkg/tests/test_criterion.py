import random
from dataclasses import replace
from fractions import Fraction

import pytest

from diffcrit.criterion import (NotEssentialPair, ProductWitness, check_product_witness, complete,
                                criterion_linear_pair, criterion_product,
                                lemma1_equivalence_check, spoly)
from diffcrit.oreop import LinDiffOp, Theorem1Witness
from diffcrit.parsing import parse_operator
from diffcrit.reduce import is_autoreduced, verify_certificate

from gen import omega_ring, param_ring, product_witness, rand_a_vector


@pytest.fixture
def R():
    return param_ring(3)


@pytest.fixture
def W():
    return omega_ring(3)


def ex1_witness(R, z="x"):
    op = lambda t: parse_operator(t, R)
    return Theorem1Witness(R.parse(z), (3, 0, 0), (0, 3, 0), op("-(d1 - y1)*(d3 - y3)"),
                           op("-(d2 - y2)*(d3 - y3)"), ({1}, {2}, {3}), R.ranking)


def ex2_witness(W):
    w = W.field.constant()
    d3 = LinDiffOp.derivation(W, 3)
    facs = tuple((d3.scale(-(w ** k)), 1) for k in (1, 2, 3))
    return ProductWitness(W.gen("x"), (1, 0, 0), (0, 1, 0), ({1}, {2}, {3}), facs, facs, W.ranking)


# -- spoly --------------------------------------------------------------------

def test_spoly_ex1(R):
    w = ex1_witness(R)
    P1, P2 = w.P1, w.P2
    assert spoly(P1, P2, R.ranking) == P1.apply_theta((0, 3, 0)) - P2.apply_theta((3, 0, 0))


def test_spoly_ex2(W):
    Q1, Q2 = W.parse("(d1*x)^3 + (d3*x)^3"), W.parse("(d2*x)^3 + (d3*x)^3")
    T = spoly(Q1, Q2, W.ranking)
    assert T == W.parse("3*(d2*x)^2*d2*Q1 - 3*(d1*x)^2*d1*Q2".replace("Q1", "((d1*x)^3 + (d3*x)^3)")
                        .replace("Q2", "((d2*x)^3 + (d3*x)^3)"))
    assert T == W.parse("9*(d3*x)^2*((d2*x)^2*d2*d3*x - (d1*x)^2*d1*d3*x)")


def test_spoly_self_is_zero(R):
    P = R.parse("d1*x^2 + y1")
    assert spoly(P, P, R.ranking).is_zero()


def test_spoly_keeps_separants(R):
    A, B = R.parse("y1*d1*x + x"), R.parse("y1*d2*x")
    assert spoly(A, B, R.ranking) == R.parse("y1*d2*(y1*d1*x + x) - y1*d1*(y1*d2*x)")


@pytest.mark.parametrize("a, b, kind", [
    ("d1*x", "d1^2*x + x", "first-derives-second") ,
    ("d1^2*x", "d1*x", "first-derives-second"),
    ("d1*x", "d1*x + x", "same-leader"),
])
def test_not_essential(R, a, b, kind):
    A, B = R.parse(a), R.parse(b)
    if kind == "first-derives-second" and R.ranking.key(A.leader(R.ranking)) < R.ranking.key(B.leader(R.ranking)):
        kind = "second-derives-first"
    with pytest.raises(NotEssentialPair) as info:
        spoly(A, B, R.ranking)
    assert info.value.kind == kind


def test_not_essential_different_variables():
    R = param_ring(2, ("x", "u"))
    with pytest.raises(NotEssentialPair) as info:
        spoly(R.parse("d1*x"), R.parse("d2*u"), R.ranking)
    assert info.value.kind == "different-variables"


# -- linear pair ----------------------------------------------------------------

def test_linear_pair_ex1(R):
    v = criterion_linear_pair(ex1_witness(R))
    assert v.applies and v.verified
    assert v.certificate.H == 1 and v.operator.is_zero
    assert verify_certificate(v.certificate)


def test_linear_pair_cubed(R):
    v = criterion_linear_pair(ex1_witness(R, "x^3"))
    assert v.verified
    sep = R.parse("3*x^2")
    assert [b for b, _ in v.certificate.multiplier] == [sep]
    assert v.certificate.multiplier[0][1] >= 1


def test_linear_pair_overlapping_blocks(R):
    v = criterion_linear_pair(replace(ex1_witness(R), deltas=({1, 2}, {2}, {3})))
    assert not v.applies and not v.verified
    assert any("disjointness" in m for m in v.violations)


# -- products -------------------------------------------------------------------

def test_product_ex2(W):
    w = ex2_witness(W)
    assert w.Q(1) == W.parse("(d1*x)^3 + (d3*x)^3")
    assert w.Q(2) == W.parse("(d2*x)^3 + (d3*x)^3")
    v = criterion_product(w)
    assert v.verified and v.checks == {"autoreduced": True, "coherent": True}


def test_pairwise_and_product_agree_ex2(W):
    rep = lemma1_equivalence_check(ex2_witness(W))
    assert rep.a and rep.b and rep.consistent
    assert len(rep.pair_certificates) == 9
    assert all(verify_certificate(c) for c in rep.pair_certificates.values())


def test_ex4_with_multiplicities_and_low_factor(R):
    w = product_witness(R, [Fraction(-2), Fraction(1, 3), Fraction(1, 3)],
                        [Fraction(-2)] * 3 + [Fraction(-5)], low=(1, 2))
    assert not w.square_free()
    assert w.Q(1) == R.parse("d3*x*(d1*x + 2*d3*x)*(d1*x - 1/3*d3*x)^2")
    v = criterion_product(w)
    assert v.applies and v.verified and v.checks == {}


def test_pairwise_and_product_agree_distinct_factors(R):
    w = product_witness(R, [Fraction(1), Fraction(2), Fraction(-3)], [Fraction(1, 2), Fraction(7)])
    rep = lemma1_equivalence_check(w)
    assert rep.a and rep.b


def test_duplicate_factor_rejected(R):
    d3 = LinDiffOp.derivation(R, 3)
    w = ProductWitness(R.gen("x"), (1, 0, 0), (0, 1, 0), ({1}, {2}, {3}),
                       ((d3, 1), (d3, 1)), ((d3.scale(R.field(2)), 1),), R.ranking)
    assert any(v.startswith("distinct") for v in check_product_witness(w))
    assert not criterion_product(w).applies
    with pytest.raises(ValueError, match="rejected"):
        lemma1_equivalence_check(w)


def test_invalid_pair_reported(R):
    y2 = LinDiffOp.scalar(R, R.field.param("y2"))
    d3 = LinDiffOp.derivation(R, 3)
    w = ProductWitness(R.gen("x"), (1, 0, 0), (0, 1, 0), ({1}, {2}, {3}),
                       ((d3, 1), (d3 + y2, 1)), ((d3, 1),), R.ranking)
    bad = check_product_witness(w)
    assert any(v.startswith("pair (2,1): constancy") for v in bad)


def test_low_factor_must_be_low(R):
    w = product_witness(R, [Fraction(1)], [Fraction(2)])
    bad = replace(w, low1=(R.parse("d1^2*x"), 1))
    assert any(v.startswith("low1") for v in check_product_witness(bad))


def test_single_factor_matches_linear_pair(R):
    w = product_witness(R, [Fraction(3)], [Fraction(-1)])
    pv = criterion_product(w)
    lv = criterion_linear_pair(w.pair_witness(1, 1))
    assert pv.verified and lv.verified
    assert pv.spoly == lv.spoly
    assert pv.certificate.remainder == lv.certificate.remainder


def test_pairwise_and_product_agree_random():
    rng = random.Random(51)
    R = param_ring(3)
    for _ in range(25):
        a1 = list({Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(rng.randint(1, 3))})
        a2 = list({Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(rng.randint(1, 3))})
        rep = lemma1_equivalence_check(product_witness(R, a1, a2))
        assert rep.a == rep.b == True  # noqa: E712


def test_random_products_with_repeats():
    rng = random.Random(52)
    R = param_ring(3)
    for k in range(15):
        a1 = rand_a_vector(rng, rng.randint(1, 4), force_repeat=k % 2 == 0)
        a2 = rand_a_vector(rng, rng.randint(1, 4))
        low = (rng.randint(0, 2), rng.randint(0, 2)) if k % 3 else None
        v = criterion_product(product_witness(R, a1, a2, low))
        assert v.verified, v.violations


# -- completion -----------------------------------------------------------------

def _stats_ok(st):
    return st.pairs_considered == st.skipped_by_criterion + st.reduced_to_zero + st.remainders_added


def test_complete_ex1(R):
    w = ex1_witness(R)
    S = [w.P1, w.P2]
    A, st = complete(S, R.ranking, True, [w])
    assert (st.pairs_considered, st.skipped_by_criterion) == (1, 1)
    assert set(A) == set(S) and st.status == "complete" and _stats_ok(st)
    B, st2 = complete(S, R.ranking, False, [w])
    assert (st2.pairs_considered, st2.reduced_to_zero, st2.skipped_by_criterion) == (1, 1, 0)
    assert B.leaders() == A.leaders() and set(B) == set(S)


def test_complete_trivial_pair(R):
    A, st = complete([R.parse("d1*x"), R.parse("d2*x")], R.ranking, True)
    assert st.pairs_considered == 1 and st.reduced_to_zero == 1 and len(A) == 2


def test_complete_adds_remainder(R):
    A, st = complete([R.parse("d1*x - x"), R.parse("d2*x - y2")], R.ranking, True)
    assert st.remainders_added >= 1 and _stats_ok(st)
    assert st.status == "inconsistent"


def test_complete_step_limit(R):
    S = [R.parse("d1*x - x"), R.parse("d2*x - x*y1")]
    A, st = complete(S, R.ranking, False, max_steps=1)
    assert st.status in ("incomplete", "complete")
    with pytest.raises(ValueError):
        complete(S, R.ranking, max_steps=0)


def test_complete_ignores_invalid_witness(R):
    w = ex1_witness(R)
    bad = replace(w, deltas=({1}, {1}, {3}))
    A, st = complete([w.P1, w.P2], R.ranking, True, [bad])
    assert st.skipped_by_criterion == 0 and st.reduced_to_zero == 1


def test_complete_random_stats_invariant():
    rng = random.Random(53)
    R = param_ring(3)
    for _ in range(10):
        a1 = rand_a_vector(rng, rng.randint(1, 3))
        a2 = rand_a_vector(rng, rng.randint(1, 3))
        w = product_witness(R, a1, a2)
        S = [w.Q(1), w.Q(2)]
        A, st = complete(S, R.ranking, True, [w])
        B, st2 = complete(S, R.ranking, False)
        assert _stats_ok(st) and _stats_ok(st2)
        assert st.skipped_by_criterion == 1
        assert A.leaders() == B.leaders()
        assert is_autoreduced(list(A), R.ranking)
