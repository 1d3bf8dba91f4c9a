"""Linear differential operators ``F[D]`` and first-criterion witnesses.

Composition follows ``d_i o c = c d_i + d_i(c)``; in closed form
``(a theta) o (b eta) = a * sum_{beta <= theta} binom(theta, beta) beta(b) (theta/beta) eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Optional

from .coeff import CoeffElement
from .diffpoly import (DiffPoly, DiffRing, Derivative, NoLeaderError, Ranking, Theta,
                       poly_sum, theta_div, theta_divides, theta_mul, theta_one,
                       theta_str, theta_support, theta_unit)


def _sub_thetas(theta: Theta):
    """All ``beta <= theta`` componentwise."""
    out = [()]
    for e in theta:
        out = [b + (k,) for b in out for k in range(e + 1)]
    return out


def _binom(theta: Theta, beta: Theta) -> int:
    n = 1
    for a, b in zip(theta, beta):
        n *= comb(a, b)
    return n


def _coeff_apply(c: CoeffElement, beta: Theta) -> CoeffElement:
    for i, e in enumerate(beta):
        for _ in range(e):
            if c.is_zero():
                return c
            c = c.derive(i + 1)
    return c


class LinDiffOp:
    """Immutable operator ``sum c_theta theta``."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: DiffRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._hash = None

    @classmethod
    def theta(cls, ring: DiffRing, theta: Theta) -> "LinDiffOp":
        return cls(ring, {tuple(theta): ring.field.one})

    @classmethod
    def derivation(cls, ring: DiffRing, i: int) -> "LinDiffOp":
        return cls.theta(ring, theta_unit(ring.m, i))

    @classmethod
    def scalar(cls, ring: DiffRing, c) -> "LinDiffOp":
        c = ring.field(c)
        return cls(ring, {theta_one(ring.m): c} if not c.is_zero() else {})

    @classmethod
    def zero(cls, ring: DiffRing) -> "LinDiffOp":
        return cls(ring, {})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, LinDiffOp):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def _coerce(self, other) -> "LinDiffOp":
        if isinstance(other, LinDiffOp):
            return other
        return LinDiffOp.scalar(self.ring, other)

    def __add__(self, other):
        o = self._coerce(other)
        t = dict(self.terms)
        for th, c in o.terms.items():
            s = t.get(th)
            s = c if s is None else s + c
            if s.is_zero():
                t.pop(th, None)
            else:
                t[th] = s
        return LinDiffOp(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return LinDiffOp(self.ring, {th: -c for th, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "LinDiffOp":
        """Left multiplication by a coefficient."""
        c = self.ring.field(c)
        if c.is_zero():
            return LinDiffOp.zero(self.ring)
        return LinDiffOp(self.ring, {th: c * a for th, a in self.terms.items()})

    def compose(self, other: "LinDiffOp") -> "LinDiffOp":
        t: dict = {}
        for th, a in self.terms.items():
            subs = _sub_thetas(th)
            for eta, b in other.terms.items():
                for beta in subs:
                    bb = _coeff_apply(b, beta)
                    if bb.is_zero():
                        continue
                    k = _binom(th, beta)
                    key = theta_mul(theta_div(th, beta), eta)
                    c = a * bb * k
                    s = t.get(key)
                    t[key] = c if s is None else s + c
        return LinDiffOp(self.ring, {k: c for k, c in t.items() if not c.is_zero()})

    def __mul__(self, other):
        if isinstance(other, LinDiffOp):
            return self.compose(other)
        return self.compose(LinDiffOp.scalar(self.ring, other))

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = LinDiffOp.scalar(self.ring, 1)
        for _ in range(k):
            out = out.compose(self)
        return out

    def apply(self, P: DiffPoly) -> DiffPoly:
        return poly_sum(P.ring, (P.apply_theta(th).scale(c) for th, c in self.terms.items()))

    def thetas(self) -> list:
        return list(self.terms)

    def order(self) -> int:
        return max((sum(th) for th in self.terms), default=0)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        from .diffpoly import _term_str
        items = sorted(self.terms.items(), key=lambda tc: (sum(tc[0]), tc[0]), reverse=True)
        out = []
        for th, c in items:
            neg, body = _term_str(c, theta_str(th) if any(th) else "")
            if not out:
                out.append("-" + body if neg else body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"LinDiffOp({self})"


def op_apply(L: LinDiffOp, P: DiffPoly) -> DiffPoly:
    return L.apply(P)


def op_compose(L: LinDiffOp, M: LinDiffOp) -> LinDiffOp:
    return L.compose(M)


# -- first criterion witnesses -----------------------------------------------

@dataclass(frozen=True)
class Theorem1Witness:
    """Pair ``P_i = theta_i z - L_i z`` with derivation blocks ``deltas``.

    ``deltas`` holds three sets of 1-based derivation indices
    (the blocks of ``theta_1``, ``theta_2`` and the shared block).
    """

    z: DiffPoly
    theta1: Theta
    theta2: Theta
    L1: LinDiffOp
    L2: LinDiffOp
    deltas: tuple
    ranking: Ranking

    @property
    def ring(self) -> DiffRing:
        return self.z.ring

    def P(self, i: int) -> DiffPoly:
        theta, L = (self.theta1, self.L1) if i == 1 else (self.theta2, self.L2)
        return self.z.apply_theta(theta) - L.apply(self.z)

    @property
    def P1(self) -> DiffPoly:
        return self.P(1)

    @property
    def P2(self) -> DiffPoly:
        return self.P(2)


@dataclass
class WitnessReport:
    valid: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_witness(w: Theorem1Witness) -> WitnessReport:
    """Check every hypothesis of the first criterion and list the failures."""
    if w.z.in_field():
        raise NoLeaderError("z must not lie in the coefficient field")
    ring = w.ring
    m = ring.m
    D = [frozenset(d) for d in w.deltas]
    bad = []
    if len(D) != 3:
        return WitnessReport(False, ["deltas: exactly three blocks required"])
    if any(not all(1 <= i <= m for i in d) for d in D):
        bad.append("deltas: derivation index out of range")
    for a in range(3):
        for b in range(a + 1, 3):
            if D[a] & D[b]:
                bad.append(f"disjointness: Delta{a + 1} and Delta{b + 1} share {sorted(D[a] & D[b])}")
    thetas = (w.theta1, w.theta2)
    ops = (w.L1, w.L2)
    for i in (0, 1):
        th = thetas[i]
        if len(th) != m:
            bad.append(f"theta{i + 1}: wrong length")
            continue
        if not any(th):
            bad.append(f"theta{i + 1}: must differ from 1")
        if not theta_support(th) <= D[i]:
            bad.append(f"theta{i + 1}: not supported on Delta{i + 1}")
        j = 1 - i
        allowed = D[i] | D[2]
        for eta, c in ops[i].terms.items():
            if not theta_support(eta) <= allowed:
                bad.append(f"support: L{i + 1} term {theta_str(eta)} outside Delta{i + 1} u Delta3")
            if not c.is_constant_for(D[j]):
                bad.append(f"constancy: L{i + 1} coefficient {c} not constant for Delta{j + 1}")
    if w.L1.compose(w.L2) != w.L2.compose(w.L1):
        bad.append("commutation: L1 L2 != L2 L1")
    lead_z = w.z.leader(w.ranking)
    for i in (0, 1):
        if len(thetas[i]) != m:
            continue
        P = w.P(i + 1)
        expected = lead_z.apply(thetas[i])
        if P.in_field() or P.leader(w.ranking) != expected:
            got = "none" if P.in_field() else ring.derivative_str(P.leader(w.ranking))
            bad.append(f"leader: P{i + 1} has leader {got}, expected {ring.derivative_str(expected)}")
    return WitnessReport(not bad, bad)


def operator_spoly(w: Theorem1Witness) -> LinDiffOp:
    """``theta2 o (theta1 - L1) - theta1 o (theta2 - L2)``."""
    ring = w.ring
    t1, t2 = LinDiffOp.theta(ring, w.theta1), LinDiffOp.theta(ring, w.theta2)
    return t2.compose(t1 - w.L1) - t1.compose(t2 - w.L2)


@dataclass
class OperatorReduction:
    T: LinDiffOp
    residue: LinDiffOp
    steps: list  # (theta rewritten, block index)

    @property
    def is_zero(self) -> bool:
        return self.residue.is_zero()


class NonTerminationError(RuntimeError):
    pass


def operator_spoly_reduce(w: Theorem1Witness) -> OperatorReduction:
    """Rewrite the operator S-polynomial by left multiples of ``theta_i - L_i``.

    The highest term (ranked through ``theta * leader(z)``) divisible by a
    ``theta_i`` is rewritten first; the rewritten thetas must strictly
    decrease.
    """
    ring = w.ring
    lead = w.z.leader(w.ranking)
    key = lambda th: w.ranking.key(lead.apply(th))
    gens = ((w.theta1, LinDiffOp.theta(ring, w.theta1) - w.L1),
            (w.theta2, LinDiffOp.theta(ring, w.theta2) - w.L2))
    T = operator_spoly(w)
    cur = T
    steps = []
    last = None
    while True:
        cands = [th for th in cur.terms if any(theta_divides(g, th) for g, _ in gens)]
        if not cands:
            break
        th = max(cands, key=key)
        if last is not None and key(th) >= last:
            raise NonTerminationError(f"rewritten term {theta_str(th)} did not decrease")
        last = key(th)
        k = 0 if theta_divides(w.theta1, th) else 1
        g, G = gens[k]
        mult = LinDiffOp(ring, {theta_div(th, g): cur.terms[th]})
        cur = cur - mult.compose(G)
        if th in cur.terms:
            raise NonTerminationError(f"term {theta_str(th)} survived its own rewrite")
        steps.append((th, k + 1))
    return OperatorReduction(T, cur, steps)
