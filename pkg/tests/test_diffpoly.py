import random

import pytest
import sympy

from diffcrit.coeff import FieldConfig
from diffcrit.diffpoly import (ELIMINATION, ORDERLY, Cmp, Derivative, DiffRing, NoLeaderError,
                               Ranking, compare, is_partially_reduced, is_reduced, theta_lcm,
                               theta_str)

from gen import param_ring, rand_derivative, rand_poly, rand_ranking, mixed_ring
from oracles import poly_expr, same_value


@pytest.fixture
def R():
    return param_ring(3)


def p(R, text):
    return R.parse(text)


def test_orderly_examples(R):
    r = R.ranking
    d1x, d2x = R.derivative("x", (1, 0, 0)), R.derivative("x", (0, 1, 0))
    assert compare(d1x, d2x, r) is Cmp.GT
    assert compare(d1x, d1x, r) is Cmp.EQ
    assert compare(R.derivative("x", (3, 0, 0)), R.derivative("x", (1, 0, 1)), r) is Cmp.GT


def test_lex_uses_derivation_priority():
    r = Ranking((3, 1, 2))
    a, b = Derivative(0, (1, 0, 0)), Derivative(0, (0, 0, 1))
    assert r.compare(b, a) is Cmp.GT
    assert Ranking((1, 2, 3)).compare(b, a) is Cmp.LT


def test_variable_priority_orderly_and_elimination():
    orderly = Ranking((1, 2), (1, 0), ORDERLY)
    elim = Ranking((1, 2), (1, 0), ELIMINATION)
    x2 = Derivative(0, (2, 0))
    u1 = Derivative(1, (1, 0))
    u0 = Derivative(1, (0, 0))
    x0 = Derivative(0, (0, 0))
    assert orderly.compare(x2, u1) is Cmp.GT     # order first
    assert orderly.compare(u0, x0) is Cmp.GT     # then variables
    assert elim.compare(u0, x2) is Cmp.GT        # variables dominate


def test_ranking_validation():
    with pytest.raises(ValueError):
        Ranking((1, 1, 2))
    with pytest.raises(ValueError):
        Ranking((1, 2), (0, 2))
    with pytest.raises(ValueError):
        Ranking((1, 2), (), "degree-revlex")


def test_derive_examples(R):
    assert p(R, "y3*d1*x").derive(1) == p(R, "y3*x[2,0,0]")
    assert p(R, "x^3").derive(2) == p(R, "3*x^2*x[0,1,0]")
    assert p(R, "y1*y3").derive(1) == p(R, "y3")


def test_apply_theta_examples(R):
    x = R.gen("x")
    assert x.apply_theta((3, 0, 0)) == R.gen("x", (3, 0, 0))
    P = p(R, "y1*x^2 + d3*x")
    assert P.apply_theta((0, 0, 0)) == P
    assert p(R, "x^3").apply_theta((0, 1, 0)) == p(R, "3*x^2*d2*x")


def test_ranked_view_examples(R):
    r = R.ranking
    P1 = p(R, "d1^3*x + d1*d3*x - y3*d1*x - y1*d3*x + y1*y3*x")
    v = P1.ranked_view(r)
    assert v.leader == R.derivative("x", (3, 0, 0)) and v.degree == 1
    assert v.initial == 1 and v.separant == 1
    Q1 = p(R, "(d1*x)^3 + (d3*x)^3")
    v = Q1.ranked_view(r)
    assert v.leader == R.derivative("x", (1, 0, 0)) and v.degree == 3
    assert v.initial == 1 and v.separant == p(R, "3*(d1*x)^2")
    v = p(R, "x^3").ranked_view(r)
    assert v.leader == R.derivative("x") and v.degree == 3 and v.separant == p(R, "3*x^2")


def test_no_leader(R):
    with pytest.raises(NoLeaderError):
        R.from_coeff(R.field.param("y1")).ranked_view(R.ranking)
    with pytest.raises(NoLeaderError):
        R.zero.leader(R.ranking)


def test_partially_reduced_examples(R):
    r = R.ranking
    A = p(R, "d1*x")
    assert is_partially_reduced(R.gen("x"), A, r)
    assert not is_partially_reduced(R.gen("x", (2, 0, 0)), A, r)
    A2 = p(R, "(d1*x)^2")
    assert is_partially_reduced(p(R, "(d1*x)^5 + x"), A2, r)
    assert not is_reduced(p(R, "(d1*x)^5 + x"), A2, r)
    assert is_reduced(p(R, "d1*x + x"), A2, r)


def test_theta_helpers():
    assert theta_lcm((2, 0, 1), (1, 3, 0)) == (2, 3, 1)
    assert theta_str((2, 0, 1)) == "d1^2*d3"
    assert theta_str((0, 0, 0)) == "1"


def test_derivative_printing(R):
    assert R.derivative_str(R.derivative("x", (2, 0, 1))) == "x[2,0,1]"
    assert R.derivative_str(R.derivative("x")) == "x"


def test_ring_rejects_name_clash():
    with pytest.raises(ValueError):
        DiffRing(FieldConfig(1, ("y",), (1,)), ("y",))
    with pytest.raises(ValueError):
        DiffRing(FieldConfig(1), ("x", "x"))


def test_ring_dict_roundtrip():
    R = mixed_ring(3)
    R.ranking = Ranking((2, 3, 1), (1, 0), ELIMINATION)
    R2 = DiffRing.from_dict(R.to_dict())
    assert R2 == R and R2.ranking == R.ranking


def test_division_by_field_element(R):
    P = p(R, "y1*x + d1*x")
    assert P / R.field.param("y1") == p(R, "x + 1/y1*d1*x")
    with pytest.raises(ZeroDivisionError):
        P / R.field.zero


# -- properties (seeded loops) -------------------------------------------------

N = 300


def _rings():
    return [param_ring(3), mixed_ring(3), param_ring(2, ("x", "u"))]


def test_leibniz_property():
    rng = random.Random(1)
    for k in range(N):
        R = _rings()[k % 3]
        P, Q = rand_poly(rng, R), rand_poly(rng, R)
        i = rng.randint(1, R.m)
        assert (P * Q).derive(i) == P.derive(i) * Q + P * Q.derive(i)


def test_derive_commutation_property():
    rng = random.Random(2)
    for k in range(N):
        R = _rings()[k % 3]
        P = rand_poly(rng, R)
        i, j = rng.randint(1, R.m), rng.randint(1, R.m)
        assert P.derive(i).derive(j) == P.derive(j).derive(i)


def test_ranking_admissibility_property():
    rng = random.Random(3)
    for _ in range(N):
        R = _rings()[rng.randrange(3)]
        n = len(R.variables)
        r = rand_ranking(rng, R.m, n)
        u, v, w = (rand_derivative(rng, R, 3) for _ in range(3))
        th = tuple(rng.randint(0, 2) for _ in range(R.m))
        if any(th):
            assert r.compare(u, u.apply(th)) is Cmp.LT
        if r.compare(u, v) is Cmp.LT:
            assert r.compare(u.apply(th), v.apply(th)) is Cmp.LT
        # total order: antisymmetry and transitivity
        assert r.compare(u, v) == Cmp(-r.compare(v, u))
        if r.compare(u, v) is Cmp.LT and r.compare(v, w) is Cmp.LT:
            assert r.compare(u, w) is Cmp.LT
        assert (r.compare(u, v) is Cmp.EQ) == (u == v)


def test_ranked_view_reconstruction_property():
    rng = random.Random(4)
    for k in range(N):
        R = _rings()[k % 3]
        P = rand_poly(rng, R)
        if P.in_field():
            continue
        v = P.ranked_view(R.ranking)
        lead = R.gen(v.leader)
        cs = P.coefficients(v.leader)
        rebuilt = sum((c * lead ** e for e, c in cs.items()), R.zero)
        assert rebuilt == P
        assert cs[v.degree] == v.initial and v.leader not in v.initial.derivatives()
        if v.degree == 1:
            assert v.initial == v.separant


def test_separant_epsilon_oracle():
    """S_P is the coefficient of eps in P(leader + eps) - P."""
    rng = random.Random(5)
    base = param_ring(3)
    R = DiffRing(base.field, ("x", "eps"))
    eps = R.derivative("eps")
    for _ in range(100):
        P = rand_poly(rng, base).substitute(lambda u: R.gen(u), target=R)
        if P.in_field():
            continue
        v = P.ranked_view(Ranking((1, 2, 3), (0, 1)))
        if v.leader.var != 0:
            continue
        shifted = P.substitute(lambda u: R.gen(u) + R.gen(eps) if u == v.leader else R.gen(u))
        coeff = (shifted - P).coefficients(eps).get(1, R.zero)
        assert coeff == v.separant


def test_arithmetic_matches_sympy():
    rng = random.Random(6)
    for k in range(60):
        R = _rings()[k % 3]
        P, Q = rand_poly(rng, R), rand_poly(rng, R)
        cfg = R.field.config
        assert same_value(poly_expr(P * Q), poly_expr(P) * poly_expr(Q), cfg)
        assert same_value(poly_expr(P - Q), poly_expr(P) - poly_expr(Q), cfg)
        assert same_value(poly_expr(P ** 2), poly_expr(P) ** 2, cfg)


def test_partial_matches_sympy():
    rng = random.Random(7)
    from oracles import deriv_symbol
    for k in range(60):
        R = _rings()[k % 3]
        P = rand_poly(rng, R)
        for u in P.derivatives():
            want = sympy.diff(poly_expr(P), deriv_symbol(R, u))
            assert same_value(poly_expr(P.partial(u)), want, R.field.config)
