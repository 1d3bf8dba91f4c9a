"""Delta-polynomials, the product criterion and a criterion-aware completion loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .diffpoly import (DiffPoly, DiffRing, Ranking, Theta, theta_div, theta_lcm)
from .oreop import (LinDiffOp, OperatorReduction, Theorem1Witness, operator_spoly_reduce,
                    validate_witness)
from .reduce import (FULL, AutoreducedSet, Inconsistent, NeedsSplitting, ReductionCertificate,
                     autoreduce, coherence_check, is_autoreduced, pseudo_reduce)


class NotEssentialPair(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def spoly(P1: DiffPoly, P2: DiffPoly, r: Ranking) -> DiffPoly:
    """``S_{P2} theta1 P1 - S_{P1} theta2 P2`` at the lcm of the leaders.

    Separant factors are kept literally, so for separants equal to 1 this is
    ``theta1 P1 - theta2 P2``.
    """
    if P1 == P2:
        return P1.ring.zero
    v1, v2 = P1.ranked_view(r), P2.ranked_view(r)
    u1, u2 = v1.leader, v2.leader
    if u1.var != u2.var:
        raise NotEssentialPair("different-variables", "leaders are derivatives of different variables")
    lam = theta_lcm(u1.theta, u2.theta)
    if lam == u1.theta and lam == u2.theta:
        raise NotEssentialPair("same-leader", "both polynomials have the same leader")
    if lam == u1.theta:
        raise NotEssentialPair("first-derives-second", "leader of P1 is a derivative of the leader of P2")
    if lam == u2.theta:
        raise NotEssentialPair("second-derives-first", "leader of P2 is a derivative of the leader of P1")
    t1, t2 = theta_div(lam, u1.theta), theta_div(lam, u2.theta)
    return v2.separant * P1.apply_theta(t1) - v1.separant * P2.apply_theta(t2)


@dataclass
class Verdict:
    applies: bool
    violations: list = field(default_factory=list)
    spoly: Optional[DiffPoly] = None
    certificate: Optional[ReductionCertificate] = None
    operator: Optional[OperatorReduction] = None
    checks: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        """Applies and every verification route reached zero."""
        if not self.applies or self.certificate is None or not self.certificate.is_zero:
            return False
        if self.operator is not None and not self.operator.is_zero:
            return False
        return all(self.checks.values())


def criterion_linear_pair(w: Theorem1Witness) -> Verdict:
    """First criterion: validate the witness, then confirm by both routes."""
    try:
        rep = validate_witness(w)
    except ValueError as e:
        return Verdict(False, [str(e)])
    if not rep.valid:
        return Verdict(False, rep.violations)
    P1, P2 = w.P1, w.P2
    T = spoly(P1, P2, w.ranking)
    cert = pseudo_reduce(T, [P1, P2], w.ranking, FULL)
    return Verdict(True, [], T, cert, operator_spoly_reduce(w))


# -- products ----------------------------------------------------------------

@dataclass(frozen=True)
class ProductWitness:
    """Products ``Qbar_i = P_{i,0}^{d_{i,0}} prod_k P_{i,k}^{d_{i,k}}``.

    ``factors1``/``factors2`` hold ``(L_{i,k}, d_{i,k})`` with
    ``P_{i,k} = theta_i z - L_{i,k} z``; ``low1``/``low2`` are optional
    ``(P_{i,0}, d_{i,0})``.
    """

    z: DiffPoly
    theta1: Theta
    theta2: Theta
    deltas: tuple
    factors1: tuple
    factors2: tuple
    ranking: Ranking
    low1: Optional[tuple] = None
    low2: Optional[tuple] = None

    @property
    def ring(self) -> DiffRing:
        return self.z.ring

    def theta(self, i: int) -> Theta:
        return self.theta1 if i == 1 else self.theta2

    def factors(self, i: int) -> tuple:
        return self.factors1 if i == 1 else self.factors2

    def low(self, i: int):
        return self.low1 if i == 1 else self.low2

    def P(self, i: int, k: int) -> DiffPoly:
        """``P_{i,k}`` for ``k >= 1``; ``k = 0`` is the low factor."""
        if k == 0:
            lo = self.low(i)
            return lo[0] if lo else self.ring.one
        L, _ = self.factors(i)[k - 1]
        return self.z.apply_theta(self.theta(i)) - L.apply(self.z)

    def pair_witness(self, k1: int, k2: int) -> Theorem1Witness:
        return Theorem1Witness(self.z, self.theta1, self.theta2,
                               self.factors1[k1 - 1][0], self.factors2[k2 - 1][0],
                               self.deltas, self.ranking)

    def Q(self, i: int, with_low: bool = True) -> DiffPoly:
        out = self.ring.one
        for k, (_, d) in enumerate(self.factors(i), start=1):
            out = out * self.P(i, k) ** d
        lo = self.low(i)
        if with_low and lo:
            out = lo[0] ** lo[1] * out
        return out

    def square_free(self) -> bool:
        return all(d == 1 for i in (1, 2) for _, d in self.factors(i))


def check_product_witness(w: ProductWitness) -> list:
    bad = []
    for i in (1, 2):
        if not w.factors(i):
            bad.append(f"factors{i}: at least one factor required")
        if any(d < 1 for _, d in w.factors(i)):
            bad.append(f"factors{i}: multiplicities must be positive")
        Ps = [w.P(i, k) for k in range(1, len(w.factors(i)) + 1)]
        if len(set(Ps)) != len(Ps):
            bad.append(f"distinct: the P_{{{i},k}} are not pairwise different")
    if bad:
        return bad
    for k1 in range(1, len(w.factors1) + 1):
        for k2 in range(1, len(w.factors2) + 1):
            try:
                rep = validate_witness(w.pair_witness(k1, k2))
            except ValueError as e:
                bad.append(f"pair ({k1},{k2}): {e}")
                continue
            bad.extend(f"pair ({k1},{k2}): {v}" for v in rep.violations)
    top = w.z.leader(w.ranking)
    for i in (1, 2):
        lo = w.low(i)
        if not lo:
            continue
        P0, d0 = lo
        if d0 < 1:
            bad.append(f"low{i}: multiplicity must be positive")
        if not P0.in_field():
            target = top.apply(w.theta(i))
            if w.ranking.key(P0.leader(w.ranking)) >= w.ranking.key(target):
                bad.append(f"low{i}: leader not below theta{i} * leader(z)")
        elif P0.is_zero():
            bad.append(f"low{i}: zero factor")
    return bad


def criterion_product(w: ProductWitness) -> Verdict:
    """Product criterion: the Delta-polynomial of ``Qbar_1, Qbar_2`` reduces to 0."""
    bad = check_product_witness(w)
    if bad:
        return Verdict(False, bad)
    r = w.ranking
    Q1, Q2 = w.Q(1), w.Q(2)
    T = spoly(Q1, Q2, r)
    cert = pseudo_reduce(T, [Q1, Q2], r, FULL)
    checks = {}
    if w.square_free():
        checks["autoreduced"] = is_autoreduced([Q1, Q2], r)
        checks["coherent"] = coherence_check([Q1, Q2], r).coherent
    return Verdict(True, [], T, cert, None, checks)


@dataclass
class Lemma1Report:
    a: bool
    b: bool
    pair_certificates: dict     # (k1, k2) -> certificate
    product_certificate: ReductionCertificate

    @property
    def consistent(self) -> bool:
        return self.a == self.b


def lemma1_equivalence_check(w: ProductWitness) -> Lemma1Report:
    """Compare pairwise reductions (a) with the product reduction (b)."""
    if not w.square_free():
        raise ValueError("square-free witness required (all multiplicities 1)")
    bad = check_product_witness(w)
    if bad:
        raise ValueError("witness rejected: " + "; ".join(bad))
    r = w.ranking
    pairs = {}
    for k1 in range(1, len(w.factors1) + 1):
        for k2 in range(1, len(w.factors2) + 1):
            A, B = w.P(1, k1), w.P(2, k2)
            pairs[(k1, k2)] = pseudo_reduce(spoly(A, B, r), [A, B], r, FULL)
    Q1, Q2 = w.Q(1, with_low=False), w.Q(2, with_low=False)
    prod = pseudo_reduce(spoly(Q1, Q2, r), [Q1, Q2], r, FULL)
    return Lemma1Report(all(c.is_zero for c in pairs.values()), prod.is_zero, pairs, prod)


# -- completion --------------------------------------------------------------

Witness = Union[Theorem1Witness, ProductWitness]


@dataclass
class CompletionStats:
    pairs_considered: int = 0
    skipped_by_criterion: int = 0
    reduced_to_zero: int = 0
    remainders_added: int = 0
    status: str = "complete"
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("status", "pairs_considered", "skipped_by_criterion", "reduced_to_zero",
                 "remainders_added", "trace")}


def witness_pair(w: Witness) -> Optional[frozenset]:
    """The pair a valid witness certifies, or None if it does not validate."""
    if isinstance(w, ProductWitness):
        if check_product_witness(w):
            return None
        return frozenset((w.Q(1), w.Q(2)))
    try:
        if not validate_witness(w).valid:
            return None
    except ValueError:
        return None
    return frozenset((w.P1, w.P2))


def complete(S: Sequence[DiffPoly], r: Ranking, use_criterion: bool = True,
             witnesses: Iterable[Witness] = (), max_steps: int = 1000):
    """Pairwise completion without case splitting.

    A pair is skipped when ``use_criterion`` is set and one of ``witnesses``
    validates and produces exactly that pair; otherwise its Delta-polynomial
    is reduced by the current set.  Returns ``(AutoreducedSet, CompletionStats)``.
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    stats = CompletionStats()
    covered = set()
    if use_criterion:
        for w in witnesses:
            p = witness_pair(w)
            if p is not None:
                covered.add(p)
    try:
        A = autoreduce(S, r)
    except NeedsSplitting as e:
        stats.status = "needs-splitting"
        stats.trace.append({"event": "needs-splitting", "poly": str(e)})
        return AutoreducedSet([P for P in S if not P.in_field()], r, check=False), stats
    except Inconsistent as e:
        stats.status = "inconsistent"
        stats.trace.append({"event": "inconsistent", "poly": str(e)})
        return AutoreducedSet([], r), stats
    done = set()
    steps = 0
    while True:
        queue = []
        els = A.elements
        for a in range(len(els)):
            for b in range(a + 1, len(els)):
                key = frozenset((els[a], els[b]))
                if key in done:
                    continue
                if els[a].leader(r).var != els[b].leader(r).var:
                    continue
                queue.append((els[a], els[b], key))
        if not queue:
            break
        for P, Q, key in queue:
            if steps >= max_steps:
                stats.status = "incomplete"
                stats.trace.append({"event": "max-steps"})
                return A, stats
            steps += 1
            done.add(key)
            stats.pairs_considered += 1
            event = {"pair": [str(P), str(Q)]}
            if key in covered:
                stats.skipped_by_criterion += 1
                stats.trace.append(event | {"event": "skipped"})
                continue
            try:
                T = spoly(P, Q, r)
            except NotEssentialPair:
                stats.reduced_to_zero += 1
                stats.trace.append(event | {"event": "not-essential"})
                continue
            R = pseudo_reduce(T, A.elements, r, FULL).remainder
            if R.is_zero():
                stats.reduced_to_zero += 1
                stats.trace.append(event | {"event": "reduced-to-zero"})
                continue
            stats.remainders_added += 1
            stats.trace.append(event | {"event": "remainder-added", "remainder": str(R)})
            try:
                A = autoreduce(list(A.elements) + [R], r)
            except NeedsSplitting as e:
                stats.status = "needs-splitting"
                stats.trace.append({"event": "needs-splitting", "poly": str(e)})
                return A, stats
            except Inconsistent as e:
                stats.status = "inconsistent"
                stats.trace.append({"event": "inconsistent", "poly": str(e)})
                return AutoreducedSet([], r), stats
            break
    return A, stats
