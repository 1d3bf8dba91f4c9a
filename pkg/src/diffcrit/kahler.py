"""Kähler differentials over the coefficient field and power-set checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .diffpoly import DiffPoly, DiffRing, Derivative, Ranking, theta_divides
from .reduce import FULL, autoreduced_violations, is_autoreduced, pseudo_reduce, verify_certificate


class KahlerForm:
    """Finite sum ``sum_u c_u du`` with polynomial coefficients."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: DiffRing, coeffs: dict):
        self.ring = ring
        self.coeffs = {u: c for u, c in coeffs.items() if not c.is_zero()}

    def __eq__(self, other):
        if isinstance(other, KahlerForm):
            return self.coeffs == other.coeffs
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, u: Derivative) -> DiffPoly:
        return self.coeffs.get(u, self.ring.zero)

    def __add__(self, other: "KahlerForm") -> "KahlerForm":
        out = dict(self.coeffs)
        for u, c in other.coeffs.items():
            out[u] = out[u] + c if u in out else c
        return KahlerForm(self.ring, out)

    def __neg__(self):
        return KahlerForm(self.ring, {u: -c for u, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, P: DiffPoly) -> "KahlerForm":
        return KahlerForm(self.ring, {u: P * c for u, c in self.coeffs.items()})

    def derive(self, i: int) -> "KahlerForm":
        """``d_i(sum c du) = sum d_i(c) du + c d(d_i u)``."""
        out: dict = {}
        for u, c in self.coeffs.items():
            dc = c.derive(i)
            out[u] = out[u] + dc if u in out else dc
            v = u.derive(i)
            out[v] = out[v] + c if v in out else c
        return KahlerForm(self.ring, out)

    def to_str(self, r: Optional[Ranking] = None) -> str:
        r = r or self.ring.ranking
        if not self.coeffs:
            return "0"
        parts = []
        for u in sorted(self.coeffs, key=r.key, reverse=True):
            c = self.coeffs[u]
            cs = c.to_str(r)
            if len(c) > 1:
                cs = f"({cs})"
            parts.append(f"{cs} * d({self.ring.derivative_str(u)})")
        return " + ".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"KahlerForm({self})"


def d(Q: DiffPoly) -> KahlerForm:
    """Canonical derivation into the module of differentials over F."""
    return KahlerForm(Q.ring, {u: Q.partial(u) for u in Q.derivatives()})


def partial_wrt(Q: DiffPoly, u: Derivative) -> DiffPoly:
    return Q.partial(u)


def monomial_diff_ideal_member(Q: DiffPoly, gens: Sequence[Derivative], power: int) -> bool:
    """Membership of ``Q`` in ``P^power`` for ``P = [gens]`` generated by derivatives.

    ``P`` is then spanned by the monomials of ``Theta gens``, so ``Q`` is in
    ``P^power`` iff every monomial has at least ``power`` such factors.
    """
    if not gens:
        raise ValueError("gens must be nonempty")
    gens = list(gens)

    def in_P(u):
        return any(u.var == g.var and theta_divides(g.theta, u.theta) for g in gens)

    for m in Q.terms:
        if sum(e for u, e in m if in_P(u)) < power:
            return False
    return True


def partial_power(A: DiffPoly, dexp: int, theta, tau) -> DiffPoly:
    """``d theta(A^dexp) / d tau(A)``, computed on a formal indeterminate for ``A``
    and then evaluated at ``A``."""
    ring = A.ring
    name = "_A"
    while name in ring.variables:
        name += "_"
    formal = DiffRing(ring.field, ring.variables + (name,), ring.ranking)
    a = formal.gen(formal.derivative(name))
    expr = (a ** dexp).apply_theta(tuple(theta))
    dexpr = expr.partial(formal.derivative(name, tuple(tau)))
    return dexpr.substitute(lambda u: A.apply_theta(u.theta), target=ring)


# -- algebraic membership ----------------------------------------------------

def _to_sympy(P: DiffPoly, symbols: dict, wsym):
    import sympy
    cfg = P.ring.field.config
    out = sympy.Integer(0)
    for m, c in P.terms.items():
        cexpr = sympy.Integer(0)
        for k, part in enumerate(c.parts):
            if part == 0:
                continue
            if hasattr(part, "as_expr"):
                pe = part.as_expr()
            else:
                pe = sympy.Rational(int(part.numerator), int(part.denominator))
            cexpr += pe * (wsym ** k if k else 1)
        mon = sympy.Integer(1)
        for u, e in m:
            mon *= symbols[u] ** e
        out += cexpr * mon
    return out


def algebraic_member(F: DiffPoly, gens: Sequence[DiffPoly]) -> bool:
    """Membership of ``F`` in the algebraic ideal ``(gens)`` of ``F[derivatives]``."""
    import sympy
    ring = F.ring
    cfg = ring.field.config
    derivs = set(F.derivatives())
    for g in gens:
        derivs |= g.derivatives()
    derivs = sorted(derivs)
    symbols = {u: sympy.Symbol(f"_u{k}") for k, u in enumerate(derivs)}
    wsym = sympy.Symbol(cfg.constant) if cfg.constant else None
    polys = [_to_sympy(g, symbols, wsym) for g in gens]
    gvars = [symbols[u] for u in derivs]
    if wsym is not None:
        polys.append(sum(c * wsym ** k for k, c in enumerate(cfg.minpoly)))
        gvars.append(wsym)
    target = _to_sympy(F, symbols, wsym)
    if not gvars:
        return target == 0 or any(p != 0 for p in polys)
    domain = sympy.QQ.frac_field(*sympy.symbols(cfg.params)) if cfg.params else sympy.QQ
    G = sympy.groebner(polys, *gvars, order="grevlex", domain=domain)
    return G.contains(target)


# -- powers of a characteristic set ------------------------------------------

@dataclass
class PowerCharsetReport:
    hypotheses: dict
    violations: list
    powers: list = field(default_factory=list)
    powers_autoreduced: bool = False
    samples: int = 0
    samples_zero: int = 0
    certificates_ok: bool = True
    phenomena: list = field(default_factory=list)  # reduced to 0 but not in (powers)

    @property
    def passed(self) -> bool:
        return (not self.violations and self.powers_autoreduced
                and self.samples_zero == self.samples and self.certificates_ok)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "hypotheses": self.hypotheses,
                "violations": self.violations, "powers": [str(p) for p in self.powers],
                "powers_autoreduced": self.powers_autoreduced, "samples": self.samples,
                "samples_zero": self.samples_zero, "certificates_ok": self.certificates_ok,
                "phenomena": self.phenomena}


def _random_theta(rng, m, max_order):
    t = [0] * m
    for _ in range(rng.randint(0, max_order)):
        t[rng.randrange(m)] += 1
    return tuple(t)


def power_charset_check(A: Sequence[DiffPoly], dexp: Sequence[int], r: Ranking,
                        samples: int = 12, seed: int = 0) -> PowerCharsetReport:
    """Check that ``{A_i^{d_i}}`` behaves as a characteristic set.

    Hypotheses: ``A`` autoreduced, every ``A_i`` of degree 1 in its leader,
    initials free of all leaders.  Random elements
    ``sum C theta(A_i^{d_i})`` must pseudo-reduce to zero; first derivatives
    of the ``A_i`` with ``d_i > 1`` are reported when they reduce to zero
    without lying in the algebraic ideal of the powers.
    """
    A = list(A)
    dexp = list(dexp)
    hyp = {}
    bad = []
    if len(A) != len(dexp) or any(k < 1 for k in dexp):
        bad.append("dexp: one positive exponent per element required")
        return PowerCharsetReport(hyp, bad)
    auto_bad = autoreduced_violations(A, r)
    hyp["autoreduced"] = not auto_bad
    bad.extend(f"autoreduced: {b}" for b in auto_bad)
    if auto_bad:
        return PowerCharsetReport(hyp, bad)
    views = [P.ranked_view(r) for P in A]
    leaders = {v.leader for v in views}
    hyp["linear_in_leaders"] = all(v.degree == 1 for v in views)
    if not hyp["linear_in_leaders"]:
        bad.append("linear: some element is not of degree 1 in its leader")
    hyp["initials_free_of_leaders"] = all(not (v.initial.derivatives() & leaders) for v in views)
    if not hyp["initials_free_of_leaders"]:
        bad.append("initials: some initial involves a leader")
    if bad:
        return PowerCharsetReport(hyp, bad)

    ring = A[0].ring
    powers = [P ** k for P, k in zip(A, dexp)]
    rep = PowerCharsetReport(hyp, bad, powers, is_autoreduced(powers, r))
    rng = random.Random(seed)
    pool = sorted(set().union(*(P.derivatives() for P in A)))
    for _ in range(samples):
        F = ring.zero
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(len(A))
            C = ring.from_coeff(rng.randint(1, 4))
            for _ in range(rng.randint(0, 2)):
                C = C * ring.gen(rng.choice(pool))
            F = F + C * powers[i].apply_theta(_random_theta(rng, ring.m, 2))
        cert = pseudo_reduce(F, powers, r, FULL)
        rep.samples += 1
        rep.samples_zero += cert.is_zero
        rep.certificates_ok &= verify_certificate(cert)
    seen = set()
    for i, (P, k) in enumerate(zip(A, dexp)):
        if k < 2:
            continue
        for j in range(1, ring.m + 1):
            cand = P.derive(j)
            if cand.in_field() or cand in seen:
                continue
            seen.add(cand)
            zero = pseudo_reduce(cand, powers, r, FULL).is_zero
            if zero and not algebraic_member(cand, powers):
                rep.phenomena.append({"element": i, "derivation": j, "poly": str(cand),
                                      "reduces_to_zero": True, "algebraic_member": False})
    return rep
