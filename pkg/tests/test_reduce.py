import random
from dataclasses import replace

import pytest

from diffcrit.criterion import spoly
from diffcrit.reduce import (FULL, PARTIAL, AutoreducedSet, Inconsistent, NeedsSplitting,
                             ReductionCertificate, autoreduce, autoreduced_violations,
                             coherence_check, is_autoreduced, pseudo_reduce, reduces_to_zero,
                             verify_certificate)

from gen import mixed_ring, param_ring, rand_poly, rand_theta


@pytest.fixture
def R():
    return param_ring(3)


@pytest.fixture
def ex1(R):
    P1 = R.parse("d1^3*x + d1*d3*x - y3*d1*x - y1*d3*x + y1*y3*x")
    P2 = R.parse("d2^3*x + d2*d3*x - y3*d2*x - y2*d3*x + y2*y3*x")
    return P1, P2


def test_ex1_spoly_reduces_with_trivial_multiplier(R, ex1):
    T = spoly(*ex1, R.ranking)
    c = pseudo_reduce(T, ex1, R.ranking)
    assert c.is_zero and c.H == 1 and c.multiplier == []
    assert verify_certificate(c)


def test_second_derivative_by_square(R):
    A = R.parse("(d1*x)^2")
    c = pseudo_reduce(R.parse("d1^2*x"), [A], R.ranking)
    assert c.is_zero
    assert c.multiplier == [(R.parse("2*d1*x"), 1)]
    assert verify_certificate(c)


def test_zero_input(R, ex1):
    c = pseudo_reduce(R.zero, ex1, R.ranking)
    assert c.is_zero and c.H == 1 and c.combination == []


def test_perturbed_remainder_fails(R, ex1):
    F = R.parse("d1^4*x + y2*d2^3*x*x")
    c = pseudo_reduce(F, ex1, R.ranking)
    assert verify_certificate(c)
    assert not verify_certificate(replace(c, remainder=c.remainder + 1))


def test_foreign_multiplier_fails(R, ex1):
    c = pseudo_reduce(R.parse("d1^4*x"), ex1, R.ranking)
    bad = replace(c, multiplier=[(R.parse("x"), 1)])
    assert not verify_certificate(bad)


def test_full_mode_degree_condition(R):
    A = R.parse("(d1*x)^2 + x")
    F = R.parse("(d1*x)^3")
    part = pseudo_reduce(F, [A], R.ranking, PARTIAL)
    assert part.remainder == F and verify_certificate(part)
    full = pseudo_reduce(F, [A], R.ranking, FULL)
    assert full.remainder == R.parse("-x*d1*x") and verify_certificate(full)
    assert not verify_certificate(replace(part, mode=FULL))


def test_bad_mode(R, ex1):
    with pytest.raises(ValueError):
        pseudo_reduce(R.one, ex1, R.ranking, "total")


def test_json_roundtrip(R, ex1):
    c = pseudo_reduce(R.parse("y1*d1^4*x*d2^3*x"), ex1, R.ranking)
    back = ReductionCertificate.from_json(c.to_json())
    assert back == c and verify_certificate(back)
    assert back.to_dict() == c.to_dict()


def test_autoreduced_examples(R, ex1):
    assert is_autoreduced(list(ex1), R.ranking)
    assert not is_autoreduced([R.parse("d1*x"), R.parse("d1^2*x")], R.ranking)
    B = [R.parse("(d1*x)^2"), R.parse("(d2*x)^3"), R.parse("(d3*x)^4")]
    assert is_autoreduced(B, R.ranking)
    assert autoreduced_violations([R.parse("y1")], R.ranking) == [
        "element 0 lies in the coefficient field"]
    assert not is_autoreduced([R.parse("(d1*x)^2"), R.parse("d1*x + x")], R.ranking)


def test_autoreduced_set_sorted(R, ex1):
    S = AutoreducedSet([ex1[0], ex1[1]], R.ranking)
    assert S.leaders() == [R.derivative("x", (0, 3, 0)), R.derivative("x", (3, 0, 0))]
    with pytest.raises(ValueError):
        AutoreducedSet([R.parse("d1*x"), R.parse("d1^2*x")], R.ranking)


def test_autoreduce(R):
    S = autoreduce([R.parse("d1*x - x"), R.parse("d1^2*x - x"), R.zero], R.ranking)
    assert list(S) == [R.parse("d1*x - x")]
    with pytest.raises(Inconsistent):
        autoreduce([R.parse("x - 1"), R.parse("x - 2")], R.ranking)


def test_coherence_examples():
    R = param_ring(3)
    rep = coherence_check([R.parse("d1*x - x"), R.parse("d2*x - x")], R.ranking)
    assert rep.coherent and len(rep.pairs) == 1
    assert rep.pairs[0].spoly == R.parse("d1*x - d2*x")
    rep = coherence_check([R.parse("d1*x - x"), R.parse("d2*x - y2")], R.ranking)
    assert rep.pairs[0].spoly == R.parse("-d2*x")
    assert rep.pairs[0].certificate.remainder == R.parse("-y2")
    assert not rep.coherent


def test_coherence_ex2():
    from gen import omega_ring
    R = omega_ring(3)
    Q = [R.parse("(d1*x)^3 + (d3*x)^3"), R.parse("(d2*x)^3 + (d3*x)^3")]
    rep = coherence_check(Q, R.ranking)
    assert rep.coherent
    assert all(verify_certificate(p.certificate) for p in rep.pairs)


def test_coherence_skips_other_variables():
    R = param_ring(2, ("x", "u"))
    rep = coherence_check([R.parse("d1*x"), R.parse("d2*u")], R.ranking)
    assert rep.pairs == [] and rep.coherent


# -- properties ---------------------------------------------------------------

def _random_set(rng, R):
    while True:
        try:
            S = autoreduce([rand_poly(rng, R, terms=2, max_deg=2) for _ in range(rng.randint(1, 3))],
                           R.ranking)
        except (NeedsSplitting, Inconsistent):
            continue
        if len(S):
            return list(S)


def _random_target(rng, R, S):
    F = rand_poly(rng, R, terms=2)
    if rng.random() < 0.6:
        A = rng.choice(S)
        F = F + rand_poly(rng, R, terms=1, max_deg=1) * A.apply_theta(rand_theta(rng, R.m, 2))
    return F


def _rings():
    return [param_ring(3), mixed_ring(3, ("x",)), param_ring(2, ("x", "u"))]


def test_random_certificates_verify():
    rng = random.Random(31)
    for k in range(80):
        R = _rings()[k % 3]
        S = _random_set(rng, R)
        F = _random_target(rng, R, S)
        for mode in (PARTIAL, FULL):
            c = pseudo_reduce(F, S, R.ranking, mode)
            assert verify_certificate(c)


def test_idempotent_on_remainders():
    rng = random.Random(32)
    for k in range(60):
        R = _rings()[k % 3]
        S = _random_set(rng, R)
        for mode in (PARTIAL, FULL):
            Rm = pseudo_reduce(_random_target(rng, R, S), S, R.ranking, mode).remainder
            again = pseudo_reduce(Rm, S, R.ranking, mode)
            assert again.remainder == Rm and again.H == 1


def test_partial_trace_strictly_decreases():
    rng = random.Random(33)
    for k in range(60):
        R = _rings()[k % 3]
        S = _random_set(rng, R)
        c = pseudo_reduce(_random_target(rng, R, S), S, R.ranking, PARTIAL)
        keys = [R.ranking.key(u) for u in c.trace]
        assert all(a > b for a, b in zip(keys, keys[1:]))


def test_degree_one_multiplier_is_initials():
    rng = random.Random(34)
    done = 0
    while done < 40:
        R = _rings()[done % 3]
        S = _random_set(rng, R)
        views = [A.ranked_view(R.ranking) for A in S]
        if any(v.degree != 1 for v in views):
            continue
        c = pseudo_reduce(_random_target(rng, R, S), S, R.ranking, FULL)
        initials = {v.initial for v in views}
        assert all(b in initials for b, _ in c.multiplier)
        done += 1


def test_reduces_to_zero_on_multiples():
    rng = random.Random(35)
    for k in range(40):
        R = _rings()[k % 3]
        S = _random_set(rng, R)
        A = rng.choice(S)
        F = rand_poly(rng, R, terms=2) * A.apply_theta(rand_theta(rng, R.m, 1))
        # a multiple of a derivative of A, reduced by A alone, always vanishes
        assert reduces_to_zero(F, [A], R.ranking)
