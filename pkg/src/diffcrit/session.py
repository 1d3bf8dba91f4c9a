"""Session files: field declaration, ranking and named objects.

::

    derivations 3
    param y1 @1
    constant w : w^2 + w + 1 = 0
    var x
    ranking orderly-lex d1>d2>d3
    let P1 = d1^3*x - y1*d3*x
    operator L1 = -(d1 - y1)*(d3 - y3)
    witness W {
      z = x; theta1 = [3,0,0]; theta2 = [0,3,0]
      L1 = L1; L2 = -(d2 - y2)*(d3 - y3)
      deltas = [1] [2] [3]
    }

Product witnesses replace ``L1``/``L2`` by repeated ``factor1 = <op> : d``
and ``factor2 = <op> : d`` entries and may add ``low1 = <poly> : d``.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import re
from typing import Optional

from .coeff import FieldConfig, FieldError
from .criterion import ProductWitness
from .diffpoly import ELIMINATION, ORDERLY, DiffPoly, DiffRing, Ranking
from .oreop import LinDiffOp, Theorem1Witness
from .parsing import ParseError, parse_operator, parse_poly

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_RESERVED = {"operator", "let", "var", "param", "constant", "ranking", "witness", "derivations"}


class Session:
    """Parsed session; ``objects`` maps names to polynomials, operators and witnesses."""

    def __init__(self, ring: DiffRing):
        self.ring = ring
        self.objects: dict = {}

    @property
    def ranking(self) -> Ranking:
        return self.ring.ranking

    def __getitem__(self, name: str):
        try:
            return self.objects[name]
        except KeyError:
            raise KeyError(f"unknown name {name!r}") from None

    def __contains__(self, name):
        return name in self.objects

    def poly(self, name: str) -> DiffPoly:
        v = self[name]
        if not isinstance(v, DiffPoly):
            raise TypeError(f"{name} is not a polynomial")
        return v

    def polys(self, names) -> list:
        return [self.poly(n) for n in names]

    def witnesses(self) -> list:
        return [v for v in self.objects.values()
                if isinstance(v, (Theorem1Witness, ProductWitness))]

    def dumps(self) -> str:
        """Canonical text; ``loads(s.dumps())`` rebuilds equal objects."""
        return dump_session(self)


class SessionError(ParseError):
    pass


def _minpoly(text: str, name: str, line: int, col: int = 1) -> tuple:
    lhs, eq, rhs = text.partition("=")
    if not eq or rhs.strip() != "0":
        raise SessionError("constant needs the form 'w : <poly in w> = 0'", line)
    aux = DiffRing(FieldConfig(1), (name,))
    P = parse_poly(lhs, aux, line=line, col=col)
    coeffs = {}
    for mono, c in P.terms.items():
        if not c.is_rational() or c.rational().denominator != 1:
            raise SessionError("minimal polynomial needs integer coefficients", line)
        if any(any(u.theta) for u, _ in mono):
            raise SessionError("minimal polynomial must not involve derivatives", line)
        coeffs[sum(e for _, e in mono)] = int(c.rational().numerator)
    deg = max(coeffs, default=0)
    return tuple(coeffs.get(k, 0) for k in range(deg + 1))


def _ranking(args: list, m: int, variables: tuple, line: int) -> Ranking:
    if not args or args[0] not in (ORDERLY, ELIMINATION):
        raise SessionError(f"ranking kind must be {ORDERLY} or {ELIMINATION}", line)
    kind = args[0]
    ders = tuple(range(1, m + 1))
    vprio = ()
    for a in args[1:]:
        parts = a.split(">")
        if all(re.fullmatch(r"d\d+", p) for p in parts):
            ders = tuple(int(p[1:]) for p in parts)
        else:
            unknown = [p for p in parts if p not in variables]
            if unknown:
                raise SessionError(f"unknown variable(s) in ranking: {unknown}", line)
            vprio = tuple(variables.index(p) for p in parts)
    try:
        return Ranking(ders, vprio, kind)
    except ValueError as e:
        raise SessionError(f"ranking: {e}", line) from None


def _theta(text: str, m: int, line: int) -> tuple:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise SessionError(f"expected [e1,...,e{m}], found {s!r}", line)
    try:
        t = tuple(int(e) for e in s[1:-1].split(","))
    except ValueError:
        raise SessionError(f"bad exponent list {s!r}", line) from None
    if len(t) != m or min(t) < 0:
        raise SessionError(f"expected {m} nonnegative exponents, found {s!r}", line)
    return t


def _deltas(text: str, m: int, line: int) -> tuple:
    blocks = re.findall(r"\[([^\]]*)\]", text)
    if len(blocks) != 3 or re.sub(r"\[[^\]]*\]", "", text).strip():
        raise SessionError("deltas needs three blocks like [1] [2] [3]", line)
    out = []
    for b in blocks:
        try:
            out.append(frozenset(int(x) for x in b.split(",") if x.strip()))
        except ValueError:
            raise SessionError(f"bad derivation block [{b}]", line) from None
    return tuple(out)


def _with_mult(text: str, line: int):
    body, sep, mult = text.rpartition(":")
    if not sep:
        return text, 1
    try:
        d = int(mult)
    except ValueError:
        raise SessionError(f"multiplicity must be an integer, found {mult.strip()!r}", line) from None
    if d < 1:
        raise SessionError("multiplicity must be positive", line)
    return body, d


def _build_witness(name: str, entries: list, session: Session, line0: int):
    ring = session.ring
    env = session.objects
    m = ring.m
    vals: dict = {}
    factors = {1: [], 2: []}
    lows = {}
    for key, text, line, col in entries:
        if key == "z":
            vals["z"] = parse_poly(text, ring, env, line, col)
        elif key in ("theta1", "theta2"):
            vals[key] = _theta(text, m, line)
        elif key in ("L1", "L2"):
            vals[key] = parse_operator(text, ring, env, line, col)
        elif key == "deltas":
            vals["deltas"] = _deltas(text, m, line)
        elif key in ("factor1", "factor2"):
            body, d = _with_mult(text, line)
            factors[int(key[-1])].append((parse_operator(body, ring, env, line, col), d))
        elif key in ("low1", "low2"):
            body, d = _with_mult(text, line)
            lows[int(key[-1])] = (parse_poly(body, ring, env, line, col), d)
        else:
            raise SessionError(f"unknown witness key {key!r}", line)
    missing = [k for k in ("z", "theta1", "theta2", "deltas") if k not in vals]
    if missing:
        raise SessionError(f"witness {name} lacks {', '.join(missing)}", line0)
    linear = "L1" in vals or "L2" in vals
    product = factors[1] or factors[2] or lows
    if linear and product:
        raise SessionError(f"witness {name} mixes L1/L2 with factor entries", line0)
    if linear:
        if "L1" not in vals or "L2" not in vals:
            raise SessionError(f"witness {name} needs both L1 and L2", line0)
        return Theorem1Witness(vals["z"], vals["theta1"], vals["theta2"], vals["L1"], vals["L2"],
                               vals["deltas"], session.ranking)
    if not factors[1] or not factors[2]:
        raise SessionError(f"witness {name} needs L1/L2 or factor1/factor2 entries", line0)
    return ProductWitness(vals["z"], vals["theta1"], vals["theta2"], vals["deltas"],
                          tuple(factors[1]), tuple(factors[2]), session.ranking,
                          lows.get(1), lows.get(2))


def loads(text: str) -> Session:
    """Parse a session; errors carry line numbers."""
    m = None
    params, bindings = [], []
    constant, minpoly = None, ()
    variables: list = []
    ranking_args = None
    session: Optional[Session] = None

    def need_session(line):
        nonlocal session
        if session is None:
            if m is None:
                raise SessionError("'derivations N' must come first", line)
            if not variables:
                raise SessionError("declare at least one variable before definitions", line)
            try:
                cfg = FieldConfig(m, tuple(params), tuple(bindings), constant, minpoly)
                ring = DiffRing(cfg, variables)
            except (FieldError, ValueError) as e:
                raise SessionError(str(e), line) from None
            if ranking_args is not None:
                ring.ranking = _ranking(ranking_args[0], m, ring.variables, ranking_args[1])
            session = Session(ring)
        return session

    def define(name, value, line):
        if not _NAME.match(name) or name in _RESERVED:
            raise SessionError(f"bad name {name!r}", line)
        s = session
        cfg = s.ring.field.config
        if name in s.objects or name in s.ring.variables or name in cfg.params \
                or name == cfg.constant or re.fullmatch(r"d\d+", name):
            raise SessionError(f"name {name!r} already in use", line)
        s.objects[name] = value

    def check_field(line):
        try:
            FieldConfig(m, tuple(params), tuple(bindings), constant, minpoly)
        except FieldError as e:
            raise SessionError(str(e), line) from None

    lines = text.splitlines()
    k = 0
    while k < len(lines):
        lineno = k + 1
        src = lines[k].split("#", 1)[0]
        raw = src.strip()
        k += 1
        if not raw:
            continue
        head, _, rest = raw.partition(" ")
        rest = rest.strip()
        try:
            if head == "derivations":
                if m is not None:
                    raise SessionError("derivations declared twice", lineno)
                if not rest.isdigit() or int(rest) < 1:
                    raise SessionError("derivations needs a positive integer", lineno)
                m = int(rest)
            elif head in ("param", "constant", "var", "ranking"):
                if m is None:
                    raise SessionError("'derivations N' must come first", lineno)
                if session is not None:
                    raise SessionError(f"{head} must precede all definitions", lineno)
                if head == "param":
                    mt = re.fullmatch(r"([A-Za-z_]\w*)(?:\s*@\s*(\d+))?", rest)
                    if not mt:
                        raise SessionError("param needs 'NAME [@i]'", lineno)
                    params.append(mt.group(1))
                    bindings.append(int(mt.group(2)) if mt.group(2) else None)
                    check_field(lineno)
                elif head == "constant":
                    if constant is not None:
                        raise SessionError("only one algebraic constant is supported", lineno)
                    cname, sep, poly = rest.partition(":")
                    cname = cname.strip()
                    if not sep or not _NAME.match(cname):
                        raise SessionError("constant needs 'NAME : <poly> = 0'", lineno)
                    constant, minpoly = cname, _minpoly(poly, cname, lineno, src.index(":") + 2)
                    check_field(lineno)
                elif head == "var":
                    for v in rest.replace(",", " ").split():
                        if not _NAME.match(v) or re.fullmatch(r"d\d+", v):
                            raise SessionError(f"bad variable name {v!r}", lineno)
                        variables.append(v)
                else:
                    ranking_args = (rest.split(), lineno)
            elif head in ("let", "operator"):
                s = need_session(lineno)
                name, eq, expr = rest.partition("=")
                if not eq:
                    raise SessionError(f"{head} needs 'NAME = expression'", lineno)
                name = name.strip()
                parse = parse_poly if head == "let" else parse_operator
                define(name, parse(expr, s.ring, s.objects, lineno, src.index("=") + 2), lineno)
            elif head == "witness":
                s = need_session(lineno)
                name, brace, after = rest.partition("{")
                name = name.strip()
                if not brace:
                    raise SessionError("witness needs 'NAME {'", lineno)
                entries = []
                chunk, cur, base = after, lineno, src.index("{") + 1
                while True:
                    body, close, tail = chunk.split("#", 1)[0].partition("}")
                    pos = base
                    for part in body.split(";"):
                        start, pos = pos, pos + len(part) + 1
                        key, eq, val = part.partition("=")
                        if not part.strip():
                            continue
                        if not eq:
                            raise SessionError(f"witness entry needs 'key = value': {part.strip()!r}",
                                               cur, start + len(part) - len(part.lstrip()) + 1)
                        entries.append((key.strip(), val, cur, start + len(key) + 2))
                    if close:
                        if tail.strip():
                            raise SessionError("text after closing brace", cur)
                        break
                    if k >= len(lines):
                        raise SessionError(f"witness {name} is not closed", lineno)
                    chunk, cur, base = lines[k], k + 1, 0
                    k += 1
                define(name, _build_witness(name, entries, s, lineno), lineno)
            else:
                raise SessionError(f"unknown directive {head!r}", lineno)
        except ParseError:
            raise
        except (ValueError, TypeError) as e:
            raise SessionError(str(e), lineno) from None
    return need_session(len(lines) + 1)


def load(path) -> Session:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# -- printing ----------------------------------------------------------------

def _mult(text: str, d: int) -> str:
    return f"{text} : {d}"


def dump_witness(name: str, w, ring: DiffRing) -> str:
    blocks = " ".join("[" + ",".join(map(str, sorted(b))) + "]" for b in w.deltas)
    out = [f"witness {name} {{",
           f"  z = {w.z}",
           f"  theta1 = [{','.join(map(str, w.theta1))}]",
           f"  theta2 = [{','.join(map(str, w.theta2))}]",
           f"  deltas = {blocks}"]
    if isinstance(w, Theorem1Witness):
        out += [f"  L1 = {w.L1}", f"  L2 = {w.L2}"]
    else:
        for i in (1, 2):
            out += [f"  factor{i} = {_mult(str(L), d)}" for L, d in w.factors(i)]
            lo = w.low(i)
            if lo:
                out.append(f"  low{i} = {_mult(str(lo[0]), lo[1])}")
    out.append("}")
    return "\n".join(out)


def dump_session(s: Session) -> str:
    cfg = s.ring.field.config
    out = [f"derivations {cfg.m}"]
    for p, b in zip(cfg.params, cfg.bindings):
        out.append(f"param {p}" + (f" @{b}" if b else ""))
    if cfg.constant:
        aux = DiffRing(FieldConfig(1), (cfg.constant,))
        w = aux.gen(cfg.constant)
        mp = sum((w ** k * c for k, c in enumerate(cfg.minpoly)), aux.zero)
        out.append(f"constant {cfg.constant} : {mp} = 0")
    out.append("var " + " ".join(s.ring.variables))
    r = s.ranking
    line = f"ranking {r.kind} " + ">".join(f"d{i}" for i in r.derivation_priority)
    if r.variable_priority:
        line += " " + ">".join(s.ring.variables[i] for i in r.variable_priority)
    out.append(line)
    for name, v in s.objects.items():
        if isinstance(v, DiffPoly):
            out.append(f"let {name} = {v}")
        elif isinstance(v, LinDiffOp):
            out.append(f"operator {name} = {v}")
        else:
            out.append(dump_witness(name, v, s.ring))
    return "\n".join(out) + "\n"


# -- JSON witness files ------------------------------------------------------

def witness_to_dict(w) -> dict:
    d = {"z": str(w.z), "theta1": list(w.theta1), "theta2": list(w.theta2),
         "deltas": [sorted(b) for b in w.deltas]}
    if isinstance(w, Theorem1Witness):
        d |= {"L1": str(w.L1), "L2": str(w.L2)}
        return d
    d["factors"] = {str(i): [{"L": str(L), "d": k} for L, k in w.factors(i)] for i in (1, 2)}
    low = {str(i): {"P": str(w.low(i)[0]), "d": w.low(i)[1]} for i in (1, 2) if w.low(i)}
    if low:
        d["low"] = low
    return d


def witness_from_dict(d: dict, ring: DiffRing, env: Optional[dict] = None):
    """Inverse of :func:`witness_to_dict`; expressions use the text grammar."""
    env = env or {}
    try:
        z = parse_poly(d["z"], ring, env)
        th1, th2 = tuple(int(e) for e in d["theta1"]), tuple(int(e) for e in d["theta2"])
        deltas = tuple(frozenset(int(i) for i in b) for b in d["deltas"])
    except KeyError as e:
        raise SessionError(f"witness lacks field {e.args[0]!r}") from None
    if len(th1) != ring.m or len(th2) != ring.m or len(deltas) != 3:
        raise SessionError(f"theta needs {ring.m} exponents and deltas three blocks")
    if "factors" in d:
        facs = []
        for i in ("1", "2"):
            facs.append(tuple((parse_operator(f["L"], ring, env), int(f.get("d", 1)))
                              for f in d["factors"].get(i, [])))
        low = d.get("low", {})
        lows = [(parse_poly(low[i]["P"], ring, env), int(low[i].get("d", 1))) if i in low else None
                for i in ("1", "2")]
        return ProductWitness(z, th1, th2, deltas, facs[0], facs[1], ring.ranking, *lows)
    if "L1" not in d or "L2" not in d:
        raise SessionError("witness needs L1 and L2 or factors")
    return Theorem1Witness(z, th1, th2, parse_operator(d["L1"], ring, env),
                           parse_operator(d["L2"], ring, env), deltas, ring.ranking)
