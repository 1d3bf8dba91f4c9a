"""Differential coefficient field.

Elements are rational functions over QQ in a list of declared parameters,
optionally extended by a single algebraic constant ``w`` with a monic
minimal polynomial.  An element is stored as its coordinate vector on the
basis ``1, w, ..., w^(n-1)``; each coordinate is either a plain rational
(``QQ.dtype``) or, when it involves parameters, a sympy ``FracElement``.
Rationals are never stored as ``FracElement``, which keeps the
representation canonical and the common all-rational case fast.

Derivation ``d_i`` acts on a parameter ``p`` by ``d_i(p) = 1`` when ``p`` is
bound to ``i`` and ``0`` otherwise; the algebraic constant is annihilated
by every derivation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from sympy import QQ
from sympy.polys.fields import FracElement, field as sympy_field

MPQ = type(QQ(1))

Scalar = Union[int, "MPQ", "CoeffElement"]


class FieldError(ValueError):
    """Invalid field configuration."""


@dataclass(frozen=True)
class FieldConfig:
    """Declaration of the coefficient field.

    ``bindings[k]`` is the (1-based) derivation acting as ``d/dparams[k]``,
    or ``None`` for a parameter that is a constant for every derivation.
    ``minpoly`` lists the integer coefficients of the minimal polynomial of
    the algebraic constant from degree 0 upwards (last entry must be 1).
    """

    m: int
    params: tuple[str, ...] = ()
    bindings: tuple[Optional[int], ...] = ()
    constant: Optional[str] = None
    minpoly: tuple[int, ...] = ()

    def __post_init__(self):
        if self.m < 1:
            raise FieldError("number of derivations must be positive")
        if len(self.params) != len(self.bindings):
            raise FieldError("one binding per parameter required")
        if len(set(self.params)) != len(self.params):
            raise FieldError("duplicate parameter name")
        for name, b in zip(self.params, self.bindings):
            if b is not None and not 1 <= b <= self.m:
                raise FieldError(f"parameter {name} bound to d{b}, outside 1..{self.m}")
        if self.constant is None:
            if self.minpoly:
                raise FieldError("minimal polynomial given without constant name")
            return
        if self.constant in self.params:
            raise FieldError(f"constant {self.constant} clashes with a parameter")
        if len(self.minpoly) < 3:
            raise FieldError("minimal polynomial must have degree >= 2")
        if self.minpoly[-1] != 1:
            raise FieldError("minimal polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.minpoly) - 1 if self.constant else 1

    def to_dict(self) -> dict:
        d = {"derivations": self.m,
             "params": [{"name": p, "derivation": b} for p, b in zip(self.params, self.bindings)]}
        if self.constant:
            d["constant"] = {"name": self.constant, "minpoly": list(self.minpoly)}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldConfig":
        params = d.get("params", [])
        const = d.get("constant")
        return cls(m=d["derivations"],
                   params=tuple(p["name"] for p in params),
                   bindings=tuple(p.get("derivation") for p in params),
                   constant=const["name"] if const else None,
                   minpoly=tuple(const["minpoly"]) if const else ())


# -- coordinate arithmetic ---------------------------------------------------
# A coordinate is an MPQ or a FracElement of the parameter field that is not a
# rational.  ``_norm`` restores that invariant after sympy arithmetic.

def _norm(x):
    if isinstance(x, FracElement):
        num, den = x.numer, x.denom
        if num.is_ground and den.is_ground:
            return QQ(num.LC) / QQ(den.LC)
    return x


def _add(a, b):
    if type(a) is MPQ and type(b) is MPQ:
        return a + b
    return _norm(a + b)


def _sub(a, b):
    if type(a) is MPQ and type(b) is MPQ:
        return a - b
    return _norm(a - b)


def _mul(a, b):
    if type(a) is MPQ and type(b) is MPQ:
        return a * b
    if type(a) is MPQ and a == 0 or type(b) is MPQ and b == 0:
        return QQ(0)
    return _norm(a * b)


def _div(a, b):
    if type(a) is MPQ and type(b) is MPQ:
        return a / b
    return _norm(a / b)


def _is_zero(a) -> bool:
    return a == 0


class CoeffField:
    """Arithmetic context for a :class:`FieldConfig`."""

    def __init__(self, config: FieldConfig):
        self.config = config
        self.n = config.degree
        if config.params:
            self._K, *gens = sympy_field(",".join(config.params), QQ)
            self._gens = tuple(gens)
        else:
            self._K, self._gens = None, ()
        # w^n = -(c_0 + ... + c_{n-1} w^{n-1})
        self._wpow = tuple(QQ(-c) for c in config.minpoly[:-1]) if config.constant else ()
        self.zero = CoeffElement(self, (QQ(0),) * self.n)
        self.one = self(1)

    def __repr__(self):
        return f"CoeffField({self.config!r})"

    def __eq__(self, other):
        return isinstance(other, CoeffField) and other.config == self.config

    def __hash__(self):
        return hash(self.config)

    def __call__(self, value) -> "CoeffElement":
        if isinstance(value, CoeffElement):
            if value.field != self:
                raise FieldError("element from a different field")
            return value
        return CoeffElement(self, (QQ(value),) + (QQ(0),) * (self.n - 1))

    def param(self, name: str) -> "CoeffElement":
        try:
            k = self.config.params.index(name)
        except ValueError:
            raise FieldError(f"unknown parameter {name}") from None
        return CoeffElement(self, (self._gens[k],) + (QQ(0),) * (self.n - 1))

    def constant(self) -> "CoeffElement":
        if not self.config.constant:
            raise FieldError("no algebraic constant declared")
        parts = [QQ(0)] * self.n
        parts[1] = QQ(1)
        return CoeffElement(self, tuple(parts))

    # -- vector helpers (polynomials in w, lowest degree first) --------------

    def _reduce(self, vec: list) -> tuple:
        n = self.n
        vec = list(vec)
        for k in range(len(vec) - 1, n - 1, -1):
            top = vec[k]
            if _is_zero(top):
                continue
            for j, c in enumerate(self._wpow):
                if c != 0:
                    vec[k - n + j] = _add(vec[k - n + j], _mul(top, c))
        out = vec[:n]
        out += [QQ(0)] * (n - len(out))
        return tuple(out)

    def _inverse(self, parts: tuple) -> tuple:
        if self.n == 1:
            return (_div(QQ(1), parts[0]),)
        # extended Euclid in K[w] against the minimal polynomial
        def trim(p):
            p = list(p)
            while p and _is_zero(p[-1]):
                p.pop()
            return p

        def divmod_(a, b):
            a = trim(a)
            q = [QQ(0)] * max(len(a) - len(b) + 1, 1)
            lead = b[-1]
            while len(a) >= len(b):
                c = _div(a[-1], lead)
                s = len(a) - len(b)
                q[s] = c
                for j, bj in enumerate(b):
                    a[s + j] = _sub(a[s + j], _mul(c, bj))
                a = trim(a)
            return q, a

        def combine(x, q, y):
            # x - q*y
            out = list(x) + [QQ(0)] * max(0, len(q) + len(y) - 1 - len(x))
            for i, qi in enumerate(q):
                if _is_zero(qi):
                    continue
                for j, yj in enumerate(y):
                    out[i + j] = _sub(out[i + j], _mul(qi, yj))
            return trim(out)

        r0, r1 = [QQ(c) for c in self.config.minpoly], trim(parts)
        s0, s1 = [], [QQ(1)]
        while len(r1) > 1:
            q, r = divmod_(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, combine(s0, q, s1)
        if not r1:
            raise ZeroDivisionError("element is not invertible; is the minimal polynomial irreducible?")
        inv_c = _div(QQ(1), r1[0])
        return self._reduce([_mul(inv_c, c) for c in s1])

    def _derive_part(self, a, i: int):
        if type(a) is MPQ:
            return QQ(0)
        acc = QQ(0)
        for gen, b in zip(self._gens, self.config.bindings):
            if b == i:
                acc = _add(acc, _norm(a.diff(gen)))
        return acc


class CoeffElement:
    """Immutable element of a :class:`CoeffField`."""

    __slots__ = ("field", "parts", "_hash")

    def __init__(self, field_: CoeffField, parts: tuple):
        self.field = field_
        self.parts = parts
        self._hash = None

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return all(_is_zero(p) for p in self.parts)

    def __bool__(self):
        return not self.is_zero()

    def is_one(self) -> bool:
        p = self.parts
        return type(p[0]) is MPQ and p[0] == 1 and all(_is_zero(x) for x in p[1:])

    def is_rational(self) -> bool:
        return type(self.parts[0]) is MPQ and all(_is_zero(x) for x in self.parts[1:])

    def rational(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.parts[0]

    def __eq__(self, other):
        if isinstance(other, CoeffElement):
            return self.field == other.field and self.parts == other.parts
        if isinstance(other, (int, MPQ)):
            return self.is_rational() and self.parts[0] == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.parts) if not self.is_rational() else hash(self.parts[0])
        return self._hash

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "CoeffElement":
        if isinstance(other, CoeffElement):
            if other.field is not self.field and other.field != self.field:
                raise FieldError("mixing elements of different fields")
            return other
        return self.field(other)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, FieldError):
            return NotImplemented
        return CoeffElement(self.field, tuple(_add(a, b) for a, b in zip(self.parts, o.parts)))

    __radd__ = __add__

    def __neg__(self):
        return CoeffElement(self.field, tuple(-a for a in self.parts))

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, FieldError):
            return NotImplemented
        return CoeffElement(self.field, tuple(_sub(a, b) for a, b in zip(self.parts, o.parts)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, FieldError):
            return NotImplemented
        f = self.field
        if f.n == 1:
            return CoeffElement(f, (_mul(self.parts[0], o.parts[0]),))
        vec = [QQ(0)] * (2 * f.n - 1)
        for i, a in enumerate(self.parts):
            if _is_zero(a):
                continue
            for j, b in enumerate(o.parts):
                if not _is_zero(b):
                    vec[i + j] = _add(vec[i + j], _mul(a, b))
        return CoeffElement(f, f._reduce(vec))

    __rmul__ = __mul__

    def inverse(self) -> "CoeffElement":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in coefficient field")
        return CoeffElement(self.field, self.field._inverse(self.parts))

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except (TypeError, FieldError):
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.field(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.field.one, self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- derivations ---------------------------------------------------------

    def derive(self, i: int) -> "CoeffElement":
        """Apply the ``i``-th derivation (1-based)."""
        f = self.field
        if not 1 <= i <= f.config.m:
            raise ValueError(f"derivation index {i} outside 1..{f.config.m}")
        if all(type(p) is MPQ for p in self.parts):
            return f.zero
        return CoeffElement(f, tuple(f._derive_part(p, i) for p in self.parts))

    def is_constant_for(self, D: Iterable[int]) -> bool:
        return all(self.derive(i).is_zero() for i in D)

    # -- printing ------------------------------------------------------------

    def monomial_parts(self):
        """Return ``(rational, [(name, exp), ...])`` if the element is a single
        rational multiple of a power product, else ``None``."""
        f = self.field
        nz = [(k, p) for k, p in enumerate(self.parts) if not _is_zero(p)]
        if len(nz) != 1:
            return None
        k, p = nz[0]
        factors = []
        if type(p) is MPQ:
            c = p
        else:
            if not p.denom.is_ground or len(p.numer.terms()) != 1:
                return None
            (mon, cn), = p.numer.terms()
            c = QQ(cn) / QQ(p.denom.LC)
            factors = [(name, e) for name, e in zip(f.config.params, mon) if e]
        if k:
            factors.append((f.config.constant, k))
        return c, factors

    def __str__(self):
        return format_coeff(self)

    def __repr__(self):
        return f"CoeffElement({self})"


def _rat_str(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _power_product(factors) -> str:
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in factors)


def _poly_terms(poly, names, extra=()):
    """Yield ``(rational, factors)`` for each term of a sympy PolyElement."""
    for mon, c in poly.terms():
        fac = [(n, e) for n, e in zip(names, mon) if e]
        yield QQ(c), fac + list(extra)


def _sum_str(terms) -> str:
    out = []
    for c, fac in terms:
        neg = c < 0
        a = -c if neg else c
        if fac:
            body = _power_product(fac) if a == 1 else f"{_rat_str(a)}*{_power_product(fac)}"
        else:
            body = _rat_str(a)
        if not out:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out) if out else "0"


def _is_atom(s: str) -> bool:
    return all(ch.isalnum() or ch in "_^" for ch in s)


def format_coeff(a: CoeffElement) -> str:
    """Canonical text of a coefficient, parseable by the expression grammar."""
    f = a.field
    names = f.config.params
    pieces = []
    poly_terms = []
    for k, p in enumerate(a.parts):
        if _is_zero(p):
            continue
        extra = ((f.config.constant, k),) if k else ()
        if type(p) is MPQ:
            poly_terms.append((p, list(extra)))
        elif p.denom.is_ground:
            d = QQ(p.denom.LC)
            poly_terms.extend((c / d, fac) for c, fac in _poly_terms(p.numer, names, extra))
        else:
            num = _sum_str(_poly_terms(p.numer, names))
            den = _sum_str(_poly_terms(p.denom, names))
            num = num if _is_atom(num) else f"({num})"
            den = den if _is_atom(den) else f"({den})"
            s = f"{num}/{den}"
            if k:
                s += "*" + _power_product(extra)
            pieces.append(s)
    out = _sum_str(poly_terms) if poly_terms else ""
    for s in pieces:
        out = s if not out else f"{out} + {s}"
    return out or "0"


def random_coeff(field_: CoeffField, rng, params: Optional[Sequence[str]] = None,
                 max_terms: int = 3, max_exp: int = 2, fractions: bool = True) -> CoeffElement:
    """Random element using only ``params`` (default: all)."""
    names = list(field_.config.params if params is None else params)
    def rand_poly():
        acc = field_.zero
        for _ in range(rng.randint(1, max_terms)):
            t = field_(QQ(rng.randint(-5, 5), rng.randint(1, 3)))
            for nm in names:
                t = t * field_.param(nm) ** rng.randint(0, max_exp)
            if field_.config.constant and rng.random() < 0.5:
                t = t * field_.constant() ** rng.randint(1, field_.n - 1)
            acc = acc + t
        return acc
    num = rand_poly()
    if fractions and names and rng.random() < 0.5:
        den = rand_poly()
        while den.is_zero():
            den = rand_poly()
        return num / den
    return num
