"""Ritt pseudo-reduction with checkable certificates.

Every reduction returns a :class:`ReductionCertificate` recording

    H * F = sum_{i, theta} C_{i,theta} * theta(A_i) + R

with ``H`` a product of initials and separants of the reducers.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .diffpoly import (DiffPoly, DiffRing, Derivative, NoLeaderError, Ranking, Theta,
                       is_partially_reduced, is_proper_derivative, poly_sum,
                       ranking_from_dict, ranking_to_dict, theta_div, theta_one)

PARTIAL = "partial"
FULL = "full"
MAX_STEPS = 100_000


@dataclass
class ReductionCertificate:
    input: DiffPoly
    reducers: tuple
    multiplier: list          # [(base DiffPoly, exponent)], factored H
    combination: list         # [(reducer index, theta, coefficient DiffPoly)]
    remainder: DiffPoly
    mode: str
    ranking: Ranking
    trace: list = field(default_factory=list, compare=False)  # targeted derivatives

    @property
    def ring(self) -> DiffRing:
        return self.input.ring

    @property
    def H(self) -> DiffPoly:
        h = self.ring.one
        for base, e in self.multiplier:
            h = h * base ** e
        return h

    @property
    def is_zero(self) -> bool:
        return self.remainder.is_zero()

    def multiplier_str(self) -> str:
        if not self.multiplier:
            return "1"
        return " * ".join(f"({b})" if e == 1 else f"({b})^{e}" for b, e in self.multiplier)

    def to_dict(self) -> dict:
        return {
            "ring": self.ring.to_dict() | {"ranking": ranking_to_dict(self.ranking)},
            "mode": self.mode,
            "input": str(self.input),
            "reducers": [str(a) for a in self.reducers],
            "multiplier": [{"base": str(b), "exp": e} for b, e in self.multiplier],
            "combination": [{"index": i, "theta": list(th), "coefficient": str(c)}
                            for i, th, c in self.combination],
            "remainder": str(self.remainder),
            "remainder_is_zero": self.is_zero,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict, ring: Optional[DiffRing] = None) -> "ReductionCertificate":
        from .parsing import parse_poly
        ring = ring or DiffRing.from_dict(d["ring"])
        p = lambda s: parse_poly(s, ring)
        return cls(
            input=p(d["input"]),
            reducers=tuple(p(s) for s in d["reducers"]),
            multiplier=[(p(m["base"]), int(m["exp"])) for m in d["multiplier"]],
            combination=[(int(c["index"]), tuple(c["theta"]), p(c["coefficient"]))
                         for c in d["combination"]],
            remainder=p(d["remainder"]),
            mode=d["mode"],
            ranking=ranking_from_dict(d["ring"]["ranking"]),
        )

    @classmethod
    def from_json(cls, text: str, ring: Optional[DiffRing] = None) -> "ReductionCertificate":
        return cls.from_dict(json.loads(text), ring)


def _pseudo_divide(R: DiffPoly, B: DiffPoly, u: Derivative, degB: int, lc: DiffPoly,
                   tag, steps: list) -> DiffPoly:
    """Eliminate powers ``u^k, k >= degB`` of ``R`` against ``B``.

    Each step ``R <- lc*R - c*u^(k-degB)*B`` is appended to ``steps``.
    """
    while R:
        cs = R.coefficients(u)
        e = max(cs)
        if e < degB:
            return R
        c = cs[e]
        if e > degB:
            c = c.mul_mono(((u, e - degB),))
        R = lc * R - c * B
        steps.append((lc, c, tag))
    return R


def pseudo_reduce(F: DiffPoly, reducers: Sequence[DiffPoly], ranking: Ranking,
                  mode: str = FULL) -> ReductionCertificate:
    """Ritt reduction of ``F`` by ``reducers``.

    The highest derivative ``theta * leader(A_i)`` (``theta != 1``) present is
    eliminated first (ties: lowest ``i``) by pseudo-division by ``theta A_i``,
    whose leading coefficient is the separant.  In full mode the remainder
    is then pseudo-divided by the ``A_i`` themselves (leading coefficient the
    initial), highest leader first.
    """
    if mode not in (PARTIAL, FULL):
        raise ValueError(f"mode must be {PARTIAL!r} or {FULL!r}")
    reducers = tuple(reducers)
    views = [A.ranked_view(ranking) for A in reducers]
    key = ranking.key
    R = F
    steps: list = []
    trace: list = []
    derived: dict = {}
    one = F.ring.one
    while len(steps) < MAX_STEPS:
        best = None
        for u in R.derivatives():
            for i, v in enumerate(views):
                if is_proper_derivative(u, v.leader):
                    cand = (key(u), -i)
                    if best is None or cand > best[0]:
                        best = (cand, u, i)
                    break
        if best is not None:
            _, u, i = best
            theta = theta_div(u.theta, views[i].leader.theta)
            B = derived.get((i, theta))
            if B is None:
                B = derived[(i, theta)] = reducers[i].apply_theta(theta)
            trace.append(u)
            R = _pseudo_divide(R, B, u, 1, views[i].separant, (i, theta), steps)
            continue
        if mode == PARTIAL:
            break
        best = None
        for i, v in enumerate(views):
            if R.degree(v.leader) >= v.degree:
                cand = (key(v.leader), -i)
                if best is None or cand > best[0]:
                    best = (cand, i)
        if best is None:
            break
        i = best[1]
        v = views[i]
        trace.append(v.leader)
        R = _pseudo_divide(R, reducers[i], v.leader, v.degree, v.initial,
                           (i, theta_one(F.ring.m)), steps)
    else:
        raise RuntimeError("pseudo-reduction exceeded the step limit")

    # H F = sum_k (prod_{l>k} s_l) c_k B_k + R
    counts: Counter = Counter()
    combo: dict = {}
    suffix = one
    for s, c, tag in reversed(steps):
        coeff = suffix * c
        prev = combo.get(tag)
        combo[tag] = coeff if prev is None else prev + coeff
        suffix = suffix * s
        if s != 1:
            counts[s] += 1
    combination = [(i, th, C) for (i, th), C in combo.items() if not C.is_zero()]
    combination.sort(key=lambda t: (t[0], t[1]))
    order = {}
    for s, _, _ in steps:
        order.setdefault(s, len(order))
    multiplier = sorted(counts.items(), key=lambda be: order[be[0]])
    return ReductionCertificate(F, reducers, multiplier, combination, R, mode, ranking, trace)


def reduces_to_zero(F: DiffPoly, reducers: Sequence[DiffPoly], ranking: Ranking,
                    mode: str = FULL) -> bool:
    return pseudo_reduce(F, reducers, ranking, mode).is_zero


def verify_certificate(c: ReductionCertificate) -> bool:
    """Re-expand the certificate identity and re-check the remainder."""
    r = c.ranking
    try:
        views = [A.ranked_view(r) for A in c.reducers]
    except NoLeaderError:
        return False
    allowed = {v.initial for v in views} | {v.separant for v in views}
    if any(b not in allowed or e < 1 for b, e in c.multiplier):
        return False
    ring = c.ring
    rhs = poly_sum(ring, (C * c.reducers[i].apply_theta(th) for i, th, C in c.combination))
    if c.H * c.input - rhs - c.remainder:
        return False
    for A, v in zip(c.reducers, views):
        if not is_partially_reduced(c.remainder, A, r):
            return False
        if c.mode == FULL and c.remainder.degree(v.leader) >= v.degree:
            return False
    return True


# -- autoreduced sets --------------------------------------------------------

def autoreduced_violations(S: Sequence[DiffPoly], r: Ranking) -> list:
    out = []
    for k, P in enumerate(S):
        if P.in_field():
            out.append(f"element {k} lies in the coefficient field")
    if out:
        return out
    views = [P.ranked_view(r) for P in S]
    leaders = [v.leader for v in views]
    if len(set(leaders)) != len(leaders):
        out.append("leaders are not pairwise distinct")
    for a, P in enumerate(S):
        for b, A in enumerate(S):
            if a == b:
                continue
            vb = views[b]
            if any(is_proper_derivative(u, vb.leader) for u in P.derivatives()):
                out.append(f"element {a} involves a proper derivative of the leader of element {b}")
            elif P.degree(vb.leader) >= vb.degree:
                out.append(f"element {a} has degree >= {vb.degree} in the leader of element {b}")
    return out


def is_autoreduced(S: Sequence[DiffPoly], r: Ranking) -> bool:
    return not autoreduced_violations(S, r)


class AutoreducedSet:
    """Autoreduced set sorted by increasing leader rank."""

    def __init__(self, elements: Iterable[DiffPoly], ranking: Ranking, check: bool = True):
        els = list(elements)
        if check:
            bad = autoreduced_violations(els, ranking)
            if bad:
                raise ValueError("not autoreduced: " + "; ".join(bad))
        self.ranking = ranking
        self.elements = tuple(sorted(els, key=lambda P: P.rank(ranking)))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, k):
        return self.elements[k]

    def leaders(self) -> list:
        return [P.leader(self.ranking) for P in self.elements]

    def __repr__(self):
        return f"AutoreducedSet([{', '.join(map(str, self.elements))}])"


class NeedsSplitting(Exception):
    """An initial or separant vanishes; case splitting would be required."""


class Inconsistent(Exception):
    """A nonzero element of the coefficient field was produced."""


def autoreduce(polys: Iterable[DiffPoly], r: Ranking) -> AutoreducedSet:
    """Reduce a finite set to an autoreduced one spanning the same saturation
    data (no case splitting)."""
    pool = [P for P in polys if not P.is_zero()]
    while True:
        for P in pool:
            if P.in_field():
                raise Inconsistent(f"nonzero field element {P}")
            v = P.ranked_view(r)
            if v.initial.is_zero() or v.separant.is_zero():
                raise NeedsSplitting(str(P))
        pool.sort(key=lambda P: P.rank(r))
        changed = False
        for k, P in enumerate(pool):
            others = pool[:k] + pool[k + 1:]
            if not others:
                continue
            R = pseudo_reduce(P, others, r, FULL).remainder
            if R != P:
                pool = others + ([R] if not R.is_zero() else [])
                changed = True
                break
        if not changed:
            return AutoreducedSet(pool, r)


# -- coherence ---------------------------------------------------------------

@dataclass
class PairCheck:
    i: int
    j: int
    spoly: DiffPoly
    certificate: ReductionCertificate

    @property
    def zero(self) -> bool:
        return self.certificate.is_zero


@dataclass
class CoherenceReport:
    pairs: list
    skipped: list = field(default_factory=list)  # (i, j, reason)

    @property
    def coherent(self) -> bool:
        return all(p.zero for p in self.pairs)


def coherence_check(S: Sequence[DiffPoly], r: Ranking) -> CoherenceReport:
    """Reduce the Delta-polynomial of every pair whose leaders share a variable."""
    from .criterion import NotEssentialPair, spoly
    S = list(S)
    leaders = [P.leader(r) for P in S]
    pairs, skipped = [], []
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            if leaders[a].var != leaders[b].var:
                continue
            try:
                T = spoly(S[a], S[b], r)
            except NotEssentialPair as e:
                skipped.append((a, b, e.kind))
                continue
            pairs.append(PairCheck(a, b, T, pseudo_reduce(T, S, r, FULL)))
    return CoherenceReport(pairs, skipped)
