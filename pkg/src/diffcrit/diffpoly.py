"""Derivatives, rankings and sparse differential polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

from .coeff import CoeffElement, CoeffField, FieldConfig

Theta = tuple  # exponent vector (e_1, ..., e_m) of d_1^e_1 ... d_m^e_m


# -- the monoid of derivation operators ---------------------------------------

def theta_one(m: int) -> Theta:
    return (0,) * m


def theta_unit(m: int, i: int) -> Theta:
    """``d_i`` as an exponent vector (``i`` is 1-based)."""
    t = [0] * m
    t[i - 1] = 1
    return tuple(t)


def theta_mul(a: Theta, b: Theta) -> Theta:
    return tuple(x + y for x, y in zip(a, b))


def theta_divides(a: Theta, b: Theta) -> bool:
    return all(x <= y for x, y in zip(a, b))


def theta_div(b: Theta, a: Theta) -> Theta:
    q = tuple(y - x for x, y in zip(a, b))
    if min(q, default=0) < 0:
        raise ValueError(f"{a} does not divide {b}")
    return q


def theta_lcm(a: Theta, b: Theta) -> Theta:
    return tuple(max(x, y) for x, y in zip(a, b))


def theta_order(a: Theta) -> int:
    return sum(a)


def theta_support(a: Theta) -> frozenset:
    """1-based indices of the derivations occurring in ``a``."""
    return frozenset(i + 1 for i, e in enumerate(a) if e)


def theta_str(a: Theta) -> str:
    parts = [f"d{i + 1}" if e == 1 else f"d{i + 1}^{e}" for i, e in enumerate(a) if e]
    return "*".join(parts) if parts else "1"


class Derivative(NamedTuple):
    """``theta`` applied to the variable with 0-based index ``var``."""

    var: int
    theta: Theta

    def derive(self, i: int) -> "Derivative":
        t = list(self.theta)
        t[i - 1] += 1
        return Derivative(self.var, tuple(t))

    def apply(self, theta: Theta) -> "Derivative":
        return Derivative(self.var, theta_mul(self.theta, theta))

    @property
    def order(self) -> int:
        return sum(self.theta)


def is_proper_derivative(u: Derivative, v: Derivative) -> bool:
    """True iff ``u = theta v`` with ``theta != 1``."""
    return u.var == v.var and u.theta != v.theta and theta_divides(v.theta, u.theta)


# -- rankings ----------------------------------------------------------------

class Cmp(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


ORDERLY = "orderly-lex"
ELIMINATION = "elimination-lex"


@dataclass(frozen=True)
class Ranking:
    """Total order on derivatives.

    ``derivation_priority`` lists 1-based derivation indices, highest first;
    ``variable_priority`` lists 0-based variable indices, highest first
    (empty means index order).
    """

    derivation_priority: tuple[int, ...]
    variable_priority: tuple[int, ...] = ()
    kind: str = ORDERLY

    def __post_init__(self):
        if self.kind not in (ORDERLY, ELIMINATION):
            raise ValueError(f"unknown ranking kind {self.kind!r}")
        if sorted(self.derivation_priority) != list(range(1, len(self.derivation_priority) + 1)):
            raise ValueError("derivation priority must be a permutation of 1..m")
        if self.variable_priority and \
                sorted(self.variable_priority) != list(range(len(self.variable_priority))):
            raise ValueError("variable priority must be a permutation of the variables")

    @classmethod
    def default(cls, m: int, kind: str = ORDERLY) -> "Ranking":
        return cls(tuple(range(1, m + 1)), (), kind)

    def key(self, u: Derivative) -> tuple:
        return _ranking_key(self, u)

    def compare(self, u: Derivative, v: Derivative) -> Cmp:
        a, b = self.key(u), self.key(v)
        return Cmp.EQ if a == b else (Cmp.GT if a > b else Cmp.LT)

    def describe(self) -> str:
        return f"{self.kind} " + ">".join(f"d{i}" for i in self.derivation_priority)


@lru_cache(maxsize=1 << 16)
def _ranking_key(r: Ranking, u: Derivative) -> tuple:
    if r.variable_priority:
        vrank = len(r.variable_priority) - r.variable_priority.index(u.var)
    else:
        vrank = -u.var
    lex = tuple(u.theta[i - 1] for i in r.derivation_priority)
    if r.kind == ORDERLY:
        return (sum(u.theta), vrank, lex)
    return (vrank, sum(u.theta), lex)


def compare(u: Derivative, v: Derivative, r: Ranking) -> Cmp:
    return r.compare(u, v)


# -- monomials ---------------------------------------------------------------
# A monomial is a tuple of (Derivative, exponent) pairs sorted by Derivative.

Monomial = tuple
ONE_MONO: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for u, e in b:
        d[u] = d.get(u, 0) + e
    return tuple(sorted(d.items()))


@lru_cache(maxsize=1 << 16)
def _mono_derive(mono: Monomial, i: int) -> tuple:
    out = []
    for k, (u, e) in enumerate(mono):
        rest = mono[:k] + ((u, e - 1),) + mono[k + 1:] if e > 1 else mono[:k] + mono[k + 1:]
        out.append((mono_mul(rest, ((u.derive(i), 1),)), e))
    return tuple(out)


def mono_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


# -- the differential polynomial ring ----------------------------------------

class DiffRing:
    """``F{x_1, ..., x_n}`` together with a display ranking."""

    def __init__(self, field: CoeffField | FieldConfig, variables: Sequence[str],
                 ranking: Optional[Ranking] = None):
        if isinstance(field, FieldConfig):
            field = CoeffField(field)
        self.field = field
        self.m = field.config.m
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable name")
        clash = set(self.variables) & (set(field.config.params) | {field.config.constant})
        if clash:
            raise ValueError(f"variable names clash with field names: {sorted(clash)}")
        self.ranking = ranking or Ranking.default(self.m)
        self.zero = DiffPoly(self, {})
        self.one = self.from_coeff(field.one)

    def __repr__(self):
        return f"DiffRing(m={self.m}, vars={self.variables})"

    def __eq__(self, other):
        return isinstance(other, DiffRing) and self.field == other.field \
            and self.variables == other.variables

    def __hash__(self):
        return hash((self.field, self.variables))

    def var_index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name}") from None

    def from_coeff(self, c) -> "DiffPoly":
        c = self.field(c)
        return DiffPoly(self, {ONE_MONO: c} if not c.is_zero() else {})

    def __call__(self, value) -> "DiffPoly":
        if isinstance(value, DiffPoly):
            return value
        return self.from_coeff(value)

    def derivative(self, var, theta: Optional[Theta] = None) -> Derivative:
        v = self.var_index(var) if isinstance(var, str) else var
        if not 0 <= v < len(self.variables):
            raise KeyError(f"variable index {v} out of range")
        theta = tuple(theta) if theta is not None else theta_one(self.m)
        if len(theta) != self.m or min(theta, default=0) < 0:
            raise ValueError(f"bad derivation exponents {theta}")
        return Derivative(v, theta)

    def gen(self, u: Derivative | str, theta: Optional[Theta] = None) -> "DiffPoly":
        if not isinstance(u, Derivative):
            u = self.derivative(u, theta)
        return DiffPoly(self, {((u, 1),): self.field.one})

    def derivative_str(self, u: Derivative) -> str:
        name = self.variables[u.var]
        if not any(u.theta):
            return name
        return f"{name}[{','.join(map(str, u.theta))}]"

    def to_dict(self) -> dict:
        r = self.ranking
        return {"field": self.field.config.to_dict(), "variables": list(self.variables),
                "ranking": ranking_to_dict(r)}

    @classmethod
    def from_dict(cls, d: dict) -> "DiffRing":
        return cls(FieldConfig.from_dict(d["field"]), d["variables"],
                   ranking_from_dict(d["ranking"]) if "ranking" in d else None)

    def parse(self, text: str, env=None) -> "DiffPoly":
        from .parsing import parse_poly
        return parse_poly(text, self, env)


def ranking_to_dict(r: Ranking) -> dict:
    return {"kind": r.kind, "derivation_priority": list(r.derivation_priority),
            "variable_priority": list(r.variable_priority)}


def ranking_from_dict(d: dict) -> Ranking:
    return Ranking(tuple(d["derivation_priority"]), tuple(d.get("variable_priority", ())),
                   d.get("kind", ORDERLY))


class NoLeaderError(ValueError):
    """The polynomial lies in the coefficient field."""


@dataclass(frozen=True)
class RankedView:
    leader: Derivative
    degree: int
    initial: "DiffPoly"
    separant: "DiffPoly"
    tail: "DiffPoly"


class DiffPoly:
    """Immutable sparse differential polynomial: ``{monomial: CoeffElement}``."""

    __slots__ = ("ring", "terms", "_hash", "_views", "_derivs")

    def __init__(self, ring: DiffRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._hash = None
        self._views = None
        self._derivs = None

    # -- basic predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def in_field(self) -> bool:
        """True iff no derivative occurs (zero included)."""
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def coeff_value(self) -> CoeffElement:
        if not self.in_field():
            raise ValueError("polynomial involves derivatives")
        return self.terms.get(ONE_MONO, self.ring.field.zero)

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.terms == other.terms
        if isinstance(other, (int, CoeffElement)) or type(other).__name__ == "mpq":
            return self.in_field() and self.coeff_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __len__(self):
        return len(self.terms)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        return self.ring.from_coeff(other)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        if not o.terms:
            return self
        t = dict(self.terms)
        for m, c in o.terms.items():
            s = t.get(m)
            if s is None:
                t[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del t[m]
                else:
                    t[m] = s
        return DiffPoly(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DiffPoly":
        c = self.ring.field(c)
        if c.is_zero():
            return self.ring.zero
        if c.is_one():
            return self
        return DiffPoly(self.ring, {m: a * c for m, a in self.terms.items()})

    def mul_mono(self, mono: Monomial, c=None) -> "DiffPoly":
        t = {mono_mul(m, mono): (a * c if c is not None else a) for m, a in self.terms.items()}
        return DiffPoly(self.ring, t)

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            try:
                return self.scale(other)
            except (TypeError, ValueError):
                return NotImplemented
        if len(other.terms) == 1:
            (m, c), = other.terms.items()
            return self.mul_mono(m, c) if m else self.scale(c)
        if len(self.terms) == 1:
            return other * self
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                s = t.get(m)
                t[m] = c if s is None else s + c
        return DiffPoly(self.ring, {m: c for m, c in t.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self.ring.field(other.coeff_value() if isinstance(other, DiffPoly) else other)
        return self.scale(c.inverse())

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        out, base = self.ring.one, self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- structure -----------------------------------------------------------

    def derivatives(self) -> frozenset:
        if self._derivs is None:
            self._derivs = frozenset(u for m in self.terms for u, _ in m)
        return self._derivs

    def degree(self, u: Derivative) -> int:
        return max((e for m in self.terms for v, e in m if v == u), default=0)

    def total_degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def coefficients(self, u: Derivative) -> dict:
        """``{k: C_k}`` with ``self = sum C_k u^k`` and ``C_k`` free of ``u``."""
        out: dict = {}
        for m, c in self.terms.items():
            k = 0
            rest = m
            for j, (v, e) in enumerate(m):
                if v == u:
                    k = e
                    rest = m[:j] + m[j + 1:]
                    break
            out.setdefault(k, {})[rest] = c
        return {k: DiffPoly(self.ring, t) for k, t in out.items()}

    def partial(self, u: Derivative) -> "DiffPoly":
        """Formal partial derivative with respect to the indeterminate ``u``."""
        t: dict = {}
        for m, c in self.terms.items():
            for j, (v, e) in enumerate(m):
                if v == u:
                    rest = m[:j] + ((v, e - 1),) + m[j + 1:] if e > 1 else m[:j] + m[j + 1:]
                    t[rest] = c * e
                    break
        return DiffPoly(self.ring, t)

    def derive(self, i: int) -> "DiffPoly":
        """Apply ``d_i`` (1-based) using the Leibniz rule."""
        if not 1 <= i <= self.ring.m:
            raise ValueError(f"derivation index {i} outside 1..{self.ring.m}")
        t: dict = {}

        def acc(m, c):
            s = t.get(m)
            t[m] = c if s is None else s + c

        for m, c in self.terms.items():
            dc = c.derive(i)
            if not dc.is_zero():
                acc(m, dc)
            for m2, e in _mono_derive(m, i):
                acc(m2, c * e if e != 1 else c)
        return DiffPoly(self.ring, {m: c for m, c in t.items() if not c.is_zero()})

    def apply_theta(self, theta: Theta) -> "DiffPoly":
        p = self
        for i, e in enumerate(theta):
            for _ in range(e):
                p = p.derive(i + 1)
        return p

    def substitute(self, fn: Callable[[Derivative], "DiffPoly"], target: Optional[DiffRing] = None):
        """Replace each derivative ``u`` by ``fn(u)``; coefficients are kept."""
        ring = target or self.ring
        out = ring.zero
        cache: dict = {}
        for m, c in self.terms.items():
            term = ring.from_coeff(c)
            for u, e in m:
                if u not in cache:
                    cache[u] = fn(u)
                term = term * cache[u] ** e
            out = out + term
        return out

    # -- ranked data ---------------------------------------------------------

    def leader(self, r: Ranking) -> Derivative:
        ds = self.derivatives()
        if not ds:
            raise NoLeaderError("no leader: polynomial lies in the coefficient field")
        return max(ds, key=r.key)

    def ranked_view(self, r: Ranking) -> RankedView:
        if self._views is None:
            self._views = {}
        v = self._views.get(r)
        if v is None:
            u = self.leader(r)
            cs = self.coefficients(u)
            d = max(cs)
            tail = self.ring.zero
            for k, c in cs.items():
                if k != d:
                    tail = tail + c.mul_mono(((u, k),)) if k else tail + c
            v = RankedView(u, d, cs[d], self.partial(u), tail)
            self._views[r] = v
        return v

    def rank(self, r: Ranking) -> tuple:
        """Sort key: leader rank then leader degree; field elements lowest."""
        if self.in_field():
            return ((),)
        v = self.ranked_view(r)
        return (r.key(v.leader), v.degree)

    # -- printing ------------------------------------------------------------

    def sorted_terms(self, r: Optional[Ranking] = None):
        r = r or self.ring.ranking

        def mkey(m):
            ks = sorted((r.key(u) for u, e in m for _ in range(e)), reverse=True)
            return (mono_degree(m), ks)

        return sorted(self.terms.items(), key=lambda mc: mkey(mc[0]), reverse=True)

    def mono_str(self, m: Monomial, r: Optional[Ranking] = None) -> str:
        r = r or self.ring.ranking
        parts = []
        for u, e in sorted(m, key=lambda ue: r.key(ue[0]), reverse=True):
            s = self.ring.derivative_str(u)
            parts.append(s if e == 1 else f"{s}^{e}")
        return "*".join(parts)

    def to_str(self, r: Optional[Ranking] = None) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms(r):
            neg, body = _term_str(c, self.mono_str(m, r) if m else "")
            if not out:
                out.append("-" + body if neg else body)
            else:
                out.append((" - " if neg else " + ") + body)
        return "".join(out)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"DiffPoly({self})"


def _term_str(c: CoeffElement, mono: str) -> tuple[bool, str]:
    from .coeff import _power_product, _rat_str
    mp = c.monomial_parts()
    if mp is not None:
        q, fac = mp
        neg = q < 0
        a = -q if neg else q
        pieces = []
        if a != 1 or (not fac and not mono):
            pieces.append(_rat_str(a))
        if fac:
            pieces.append(_power_product(fac))
        if mono:
            pieces.append(mono)
        return neg, "*".join(pieces)
    s = str(c)
    return False, f"({s})*{mono}" if mono else f"({s})"


# -- free functions mirroring the operation list ------------------------------

def derive(P: DiffPoly, i: int) -> DiffPoly:
    return P.derive(i)


def apply_theta(P: DiffPoly, theta: Theta) -> DiffPoly:
    return P.apply_theta(theta)


def ranked_view(P: DiffPoly, r: Ranking) -> RankedView:
    return P.ranked_view(r)


def is_partially_reduced(F: DiffPoly, A: DiffPoly, r: Ranking) -> bool:
    """True iff ``F`` involves no proper derivative of the leader of ``A``."""
    lead = A.leader(r)
    return not any(is_proper_derivative(u, lead) for u in F.derivatives())


def is_reduced(F: DiffPoly, A: DiffPoly, r: Ranking) -> bool:
    """Partially reduced and of lower degree in the leader of ``A``."""
    v = A.ranked_view(r)
    return is_partially_reduced(F, A, r) and F.degree(v.leader) < v.degree


def poly_sum(ring: DiffRing, items: Iterable[DiffPoly]) -> DiffPoly:
    t: dict = {}
    for p in items:
        for m, c in p.terms.items():
            s = t.get(m)
            t[m] = c if s is None else s + c
    return DiffPoly(ring, {m: c for m, c in t.items() if not c.is_zero()})
