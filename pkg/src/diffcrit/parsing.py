"""Text grammar for differential polynomials and operators.

Polynomial context::

    d1^3*x + d1*d3*x - y3*d1*x - y1*d3*x + y1*y3*x
    (d1*x)^3 + x[0,0,1]^3
    3/2*w*x[1,0,0]

A derivation ``d<i>`` (optionally ``d<i>^k``) inside a product applies to the
factor that immediately follows it, so ``d1*d3*x`` is a derivative and
``d2*Q1`` differentiates a named polynomial.  Operator context (``operator``
declarations) reads the same tokens as elements of ``F[D]``, with ``*`` as
composition::

    -(d1 - y1)*(d3 - y3)
"""

from __future__ import annotations

import re
from typing import Mapping, Optional

from .diffpoly import DiffPoly, DiffRing, Derivative, theta_unit
from .oreop import LinDiffOp

MAX_EXPONENT = 10_000

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()\[\],])
""", re.VERBOSE)

_DERIV = re.compile(r"d(\d+)$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


def tokenize(text: str, line: int = 1, col: int = 1):
    """Tokens as ``(kind, text, line, column)``; ``col`` is where ``text``
    starts on its first line."""
    toks = []
    pos = 0
    col0 = 1 - col  # offset of current line start
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = mt.lastgroup
        val = mt.group()
        if kind == "ws":
            for k, ch in enumerate(val):
                if ch == "\n":
                    line += 1
                    col0 = pos + k + 1
        else:
            toks.append((kind, val, line, pos - col0 + 1))
        pos = mt.end()
    toks.append(("eof", "", line, pos - col0 + 1))
    return toks


class _Parser:
    def __init__(self, text: str, ring: DiffRing, env: Optional[Mapping] = None,
                 operator: bool = False, line: int = 1, col: int = 1):
        self.toks = tokenize(text, line, col)
        self.i = 0
        self.ring = ring
        self.env = env or {}
        self.operator = operator

    # -- token helpers -------------------------------------------------------

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok[2], tok[3])

    def expect(self, val):
        t = self.next()
        if t[1] != val or t[0] == "eof":
            raise self.error(f"expected {val!r}, found {t[1] or 'end of input'!r}", t)
        return t

    def int_token(self):
        t = self.next()
        if t[0] != "num":
            raise self.error("expected an integer", t)
        v = int(t[1])
        if v > MAX_EXPONENT:
            raise self.error(f"exponent overflow ({v} > {MAX_EXPONENT})", t)
        return v

    # -- value helpers -------------------------------------------------------

    def zero(self):
        return LinDiffOp.zero(self.ring) if self.operator else self.ring.zero

    def scalar(self, c):
        return LinDiffOp.scalar(self.ring, c) if self.operator else self.ring.from_coeff(c)

    # -- grammar -------------------------------------------------------------

    def parse(self):
        v = self.expr()
        t = self.peek()
        if t[0] != "eof":
            raise self.error(f"unexpected {t[1]!r}", t)
        return v

    def expr(self):
        neg = False
        t = self.peek()
        if t[1] in "+-" and t[0] == "op":
            self.next()
            neg = t[1] == "-"
        acc = self.term()
        if neg:
            acc = -acc
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.next()
                v = self.term()
                acc = acc + v if t[1] == "+" else acc - v
            else:
                return acc

    def term(self):
        items = [(None, self.power())]
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.next()
            items.append((op, self.power()))
        acc = None
        pending = None
        for op, (kind, val, tok) in items:
            if op is not None and op[1] == "/" and (kind == "deriv" or pending is not None):
                raise self.error("cannot divide by a derivation", op)
            if kind == "deriv" and not self.operator:
                pending = val if pending is None else tuple(a + b for a, b in zip(pending, val))
                continue
            if kind == "deriv":
                val = LinDiffOp.theta(self.ring, val)
            if pending is not None:
                val = val.apply_theta(pending)
                pending = None
            if acc is None:
                acc = val
            elif op[1] == "*":
                acc = acc * val
            else:
                acc = self.divide(acc, val, op)
        if pending is not None:
            raise self.error("derivation operator without operand")
        return acc

    def divide(self, acc, val, tok):
        if self.operator:
            if set(val.terms) - {(0,) * self.ring.m}:
                raise self.error("division by a non-scalar operator", tok)
            c = val.terms.get((0,) * self.ring.m)
        else:
            if not val.in_field():
                raise self.error("division by a non-constant polynomial", tok)
            c = val.coeff_value()
        if c is None or c.is_zero():
            raise self.error("division by zero", tok)
        return acc * LinDiffOp.scalar(self.ring, c.inverse()) if self.operator else acc.scale(c.inverse())

    def power(self):
        kind, val, tok = self.primary()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.next()
            k = self.int_token()
            if kind == "deriv":
                val = tuple(e * k for e in val)
            else:
                val = val ** k
        return kind, val, tok

    def primary(self):
        t = self.next()
        kind, text = t[0], t[1]
        if kind == "num":
            return "value", self.scalar(int(text)), t
        if kind == "op" and text == "(":
            v = self.expr()
            self.expect(")")
            return "value", v, t
        if kind == "name":
            return self.name(t)
        if kind == "eof":
            raise self.error("unexpected end of input", t)
        raise self.error(f"unexpected {text!r}", t)

    def name(self, t):
        text = t[1]
        ring = self.ring
        cfg = ring.field.config
        md = _DERIV.match(text)
        if md and text not in self.env:
            i = int(md.group(1))
            if not 1 <= i <= ring.m:
                raise self.error(f"derivation {text} outside d1..d{ring.m}", t)
            return "deriv", theta_unit(ring.m, i), t
        if text in cfg.params:
            return "value", self.scalar(ring.field.param(text)), t
        if cfg.constant and text == cfg.constant:
            return "value", self.scalar(ring.field.constant()), t
        if text in ring.variables:
            if self.operator:
                raise self.error(f"variable {text} not allowed in an operator", t)
            theta = (0,) * ring.m
            if self.peek()[1] == "[" and self.peek()[0] == "op":
                self.next()
                exps = [self.int_token()]
                while self.peek()[1] == ",":
                    self.next()
                    exps.append(self.int_token())
                self.expect("]")
                if len(exps) != ring.m:
                    raise self.error(f"derivative {text} needs {ring.m} exponents, got {len(exps)}", t)
                theta = tuple(exps)
            return "value", ring.gen(Derivative(ring.var_index(text), theta)), t
        if text in self.env:
            v = self.env[text]
            if self.operator and not isinstance(v, LinDiffOp):
                if isinstance(v, DiffPoly) and v.in_field():
                    return "value", self.scalar(v.coeff_value()), t
                raise self.error(f"{text} is a polynomial, not an operator", t)
            if not self.operator and not isinstance(v, DiffPoly):
                raise self.error(f"{text} is an operator; use it in operator context", t)
            return "value", v, t
        raise self.error(f"unknown name {text!r}", t)


def parse_poly(text: str, ring: DiffRing, env: Optional[Mapping] = None, line: int = 1,
               col: int = 1) -> DiffPoly:
    return _Parser(text, ring, env, operator=False, line=line, col=col).parse()


def parse_operator(text: str, ring: DiffRing, env: Optional[Mapping] = None, line: int = 1,
                   col: int = 1) -> LinDiffOp:
    return _Parser(text, ring, env, operator=True, line=line, col=col).parse()


def parse_expr(text: str, ring: DiffRing, env: Optional[Mapping] = None, line: int = 1):
    """Polynomial by default; a leading ``operator`` keyword switches context."""
    s = text.lstrip()
    if s.startswith("operator ") or s.startswith("operator\t"):
        start = len(text) - len(s) + len("operator")
        return parse_operator(text[start:], ring, env, line, start + 1)
    return parse_poly(text, ring, env, line)
