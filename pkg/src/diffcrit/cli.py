"""Command line front end.

Exit status: 0 success, 1 an asserted outcome failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from importlib import resources

from .criterion import (NotEssentialPair, ProductWitness, complete, criterion_linear_pair,
                        criterion_product, lemma1_equivalence_check, spoly)
from .diffpoly import NoLeaderError
from .kahler import KahlerForm, d, monomial_diff_ideal_member, power_charset_check
from .oreop import Theorem1Witness
from .parsing import ParseError
from .reduce import (FULL, PARTIAL, autoreduced_violations, coherence_check, is_autoreduced,
                     pseudo_reduce, verify_certificate)
from .session import Session, load, loads, witness_from_dict


class UsageError(Exception):
    pass


def corpus_text(n: int) -> str:
    return resources.files("diffcrit").joinpath("corpus", f"ex{n}.session").read_text("utf-8")


def corpus_session(n: int) -> Session:
    return loads(corpus_text(n))


def _names(text: str) -> list:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("empty name list")
    return names


def _cert_dict(c) -> dict:
    return c.to_dict() | {"verified": verify_certificate(c)}


def _verdict_dict(v) -> dict:
    out = {"applies": v.applies, "violations": v.violations, "verified": v.verified}
    if v.spoly is not None:
        out["spoly"] = str(v.spoly)
        out["certificate"] = _cert_dict(v.certificate)
    if v.operator is not None:
        out["operator_spoly"] = str(v.operator.T)
        out["operator_residue"] = str(v.operator.residue)
    if v.checks:
        out["checks"] = v.checks
    return out


# -- commands ----------------------------------------------------------------

def cmd_reduce(s: Session, a) -> tuple:
    F = s.poly(a.target)
    A = s.polys(_names(a.by))
    c = pseudo_reduce(F, A, s.ranking, a.mode)
    rep = _cert_dict(c)
    text = [f"remainder: {c.remainder}", f"H = {c.multiplier_str()}",
            f"certificate verified: {rep['verified']}"]
    return 0 if rep["verified"] else 1, rep, text


def cmd_spoly(s: Session, a) -> tuple:
    names = _names(a.pair)
    if len(names) != 2:
        raise UsageError("--pair needs exactly two names")
    P1, P2 = s.polys(names)
    T = spoly(P1, P2, s.ranking)
    return 0, {"spoly": str(T)}, [f"spoly({names[0]}, {names[1]}) = {T}"]


def _witness(s: Session, ref: str):
    if ref in s:
        return s[ref]
    if os.path.exists(ref):
        with open(ref, encoding="utf-8") as fh:
            return witness_from_dict(json.load(fh), s.ring, s.objects)
    raise UsageError(f"{ref!r} is neither a session witness nor a witness file")


def cmd_criterion(s: Session, a) -> tuple:
    w = _witness(s, a.witness)
    if isinstance(w, Theorem1Witness):
        v = criterion_linear_pair(w)
        kind = "linear-pair"
    elif isinstance(w, ProductWitness):
        v = criterion_product(w)
        kind = "product"
    else:
        raise UsageError(f"{a.witness} is not a witness")
    rep = {"kind": kind} | _verdict_dict(v)
    text = [f"{kind} criterion {'applies' if v.applies else 'does not apply'}"]
    text += [f"  violation: {x}" for x in v.violations]
    if v.applies:
        text += [f"spoly: {v.spoly}", f"remainder: {v.certificate.remainder}",
                 f"H = {v.certificate.multiplier_str()}"]
        if v.operator is not None:
            text.append(f"operator residue: {v.operator.residue}")
        text += [f"{k}: {val}" for k, val in v.checks.items()]
    return (0 if v.verified else 1), rep, text


def cmd_coherence(s: Session, a) -> tuple:
    S = s.polys(_names(a.set))
    rep = coherence_check(S, s.ranking)
    out = {"coherent": rep.coherent,
           "pairs": [{"i": p.i, "j": p.j, "spoly": str(p.spoly),
                      "remainder": str(p.certificate.remainder)} for p in rep.pairs],
           "skipped": [{"i": i, "j": j, "reason": why} for i, j, why in rep.skipped]}
    text = [f"pair ({p.i},{p.j}): remainder {p.certificate.remainder}" for p in rep.pairs]
    text.append(f"coherent: {rep.coherent}")
    return (0 if rep.coherent else 1), out, text


def cmd_complete(s: Session, a) -> tuple:
    S = s.polys(_names(a.set))
    A, stats = complete(S, s.ranking, use_criterion=not a.no_criterion,
                        witnesses=s.witnesses(), max_steps=a.max_steps)
    out = stats.to_dict() | {"set": [str(P) for P in A],
                             "leaders": [s.ring.derivative_str(u) for u in A.leaders()]}
    text = [f"status: {stats.status}",
            f"pairs considered: {stats.pairs_considered}, skipped by criterion: "
            f"{stats.skipped_by_criterion}, reduced to zero: {stats.reduced_to_zero}, "
            f"remainders added: {stats.remainders_added}"]
    text += [f"  {P}" for P in A]
    return (0 if stats.status == "complete" else 1), out, text


def cmd_kahler(s: Session, a) -> tuple:
    Q = s.poly(a.target)
    form = d(Q)
    out = {"d": str(form),
           "coefficients": {s.ring.derivative_str(u): str(c) for u, c in form.coeffs.items()}}
    text = [f"d({a.target}) = {form}"]
    status = 0
    if a.gens:
        gens = []
        for n in _names(a.gens):
            P = s.poly(n)
            if P.in_field() or P != s.ring.gen(P.leader(s.ranking)):
                raise UsageError(f"{n} is not a single derivative")
            gens.append(P.leader(s.ranking))
        power = a.power
        mem = {s.ring.derivative_str(u): monomial_diff_ideal_member(form[u], gens, power)
               for u in sorted(form.coeffs, key=s.ranking.key, reverse=True)}
        out["membership"] = {"power": power, "coefficients": mem}
        text += [f"  coefficient of d({k}) in P^{power}: {v}" for k, v in mem.items()]
    if a.charset:
        if not a.dexp:
            raise UsageError("--charset needs --dexp")
        dexp = [int(x) for x in _names(a.dexp)]
        rep = power_charset_check(s.polys(_names(a.charset)), dexp, s.ranking)
        out["power_charset"] = rep.to_dict()
        text.append(f"power characteristic set check: {'pass' if rep.passed else 'fail'}")
        text += [f"  violation: {x}" for x in rep.violations]
        text += [f"  reduces to 0 outside the algebraic ideal: {p['poly']}" for p in rep.phenomena]
        status = 0 if rep.passed else 1
    return status, out, text


def cmd_print(s: Session, a) -> tuple:
    text = s.dumps()
    return 0, {"session": text}, [text.rstrip("\n")]


# -- examples ----------------------------------------------------------------

class _Checks:
    def __init__(self):
        self.items = []

    def __call__(self, name, ok, detail=""):
        self.items.append({"check": name, "ok": bool(ok), "detail": str(detail)})

    @property
    def ok(self):
        return all(c["ok"] for c in self.items)


def _example1(s: Session, chk: _Checks):
    r = s.ranking
    P1, P2 = s.poly("P1"), s.poly("P2")
    T = spoly(P1, P2, r)
    chk("P1, P2 built from W1", s["W1"].P1 == P1 and s["W1"].P2 == P2)
    chk("autoreduced {P1, P2}", is_autoreduced([P1, P2], r))
    chk("spoly = d2^3 P1 - d1^3 P2", T == P1.apply_theta((0, 3, 0)) - P2.apply_theta((3, 0, 0)), T)
    c = pseudo_reduce(T, [P1, P2], r, FULL)
    chk("spoly reduces to 0 with H = 1", c.is_zero and not c.multiplier, c.multiplier_str())
    chk("certificate verifies", verify_certificate(c))
    v = criterion_linear_pair(s["W1"])
    chk("criterion applies (z = x)", v.applies, v.violations)
    chk("operator residue is 0", v.operator is not None and v.operator.is_zero,
        getattr(v.operator, "residue", None))
    v3 = criterion_linear_pair(s["W3"])
    chk("criterion applies (z = x^3)", v3.verified, v3.violations)
    sep = s.ring.parse("3*x^2")
    m = v3.certificate.multiplier
    chk("H is a positive power of 3x^2 (z = x^3)",
        len(m) == 1 and m[0][0] == sep and m[0][1] > 0, v3.certificate.multiplier_str())
    chk("certificate verifies (z = x^3)", verify_certificate(v3.certificate))


def _example2(s: Session, chk: _Checks):
    r = s.ranking
    Q1, Q2 = s.poly("Q1"), s.poly("Q2")
    w = s["W"]
    chk("products of the factors give Q1, Q2", w.Q(1) == Q1 and w.Q(2) == Q2)
    T = spoly(Q1, Q2, r)
    chk("spoly matches the displayed value", T == s.poly("S"), T)
    c = pseudo_reduce(T, [Q1, Q2], r, FULL)
    chk("spoly pseudo-reduces to 0", c.is_zero, c.remainder)
    chk("certificate verifies", verify_certificate(c))
    rep = lemma1_equivalence_check(w)
    chk("pairwise reductions all reach 0 (9 pairs)", rep.a and len(rep.pair_certificates) == 9)
    chk("product reduction reaches 0", rep.b)
    v = criterion_product(w)
    chk("product criterion applies and verifies", v.verified, v.violations)


def _example3(s: Session, chk: _Checks):
    ring, r = s.ring, s.ranking
    A = s.polys(["A1", "A2", "A3"])
    u1, u2, u3 = (P.leader(r) for P in A)
    M, N = s.poly("M"), s.poly("N")
    want_M = KahlerForm(ring, {u1: A[1] * A[2], u2: A[0] * A[2], u3: A[0] * A[1]})
    want_N = KahlerForm(ring, {u1: 2 * A[0], u2: 3 * A[1] ** 2, u3: 4 * A[2] ** 3})
    chk("d(M) expansion", d(M) == want_M, d(M))
    chk("d(N) expansion", d(N) == want_N, d(N))
    chk("M in P^3", monomial_diff_ideal_member(M, [u1, u2, u3], 3))
    chk("coefficients of d(M) in P^2",
        all(monomial_diff_ideal_member(c, [u1, u2, u3], 2) for c in d(M).coeffs.values()))
    dN = d(N)
    chk("coefficient of d(d1 x) in [d1 x]", monomial_diff_ideal_member(dN[u1], [u1], 1))
    chk("coefficient of d(d2 x) in [d2 x]^2", monomial_diff_ideal_member(dN[u2], [u2], 2))
    chk("coefficient of d(d3 x) in [d3 x]^3", monomial_diff_ideal_member(dN[u3], [u3], 3))
    rep = power_charset_check(A, [2, 3, 4], r)
    chk("power characteristic set check passes", rep.passed, rep.violations)
    D = str(s.poly("D"))
    chk("d1^2 x reduces to 0 outside the algebraic ideal",
        any(p["poly"] == D for p in rep.phenomena), [p["poly"] for p in rep.phenomena])


def _example4(s: Session, chk: _Checks):
    r = s.ranking
    w = s["W"]
    chk("products of the factors give Q1, Q2", w.Q(1) == s.poly("Q1") and w.Q(2) == s.poly("Q2"))
    chk("repeated factors present", not w.square_free())
    v = criterion_product(w)
    chk("product criterion applies", v.applies, v.violations)
    chk("spoly pseudo-reduces to 0", v.certificate is not None and v.certificate.is_zero)
    chk("certificate verifies", v.certificate is not None and verify_certificate(v.certificate))
    Q1, Q2 = w.Q(1), w.Q(2)
    chk("{Q1, Q2} autoreduced", not autoreduced_violations([Q1, Q2], r))


_EXAMPLES = {1: _example1, 2: _example2, 3: _example3, 4: _example4}


def run_example(n: int) -> tuple:
    s = corpus_session(n)
    chk = _Checks()
    t0 = time.perf_counter()
    _EXAMPLES[n](s, chk)
    elapsed = time.perf_counter() - t0
    rep = {"example": n, "ok": chk.ok, "seconds": round(elapsed, 4), "checks": chk.items}
    text = [f"[{'ok' if c['ok'] else 'FAIL'}] {c['check']}" for c in chk.items]
    text.append(f"example {n}: {'all checks hold' if chk.ok else 'FAILED'} ({elapsed:.3f} s)")
    return (0 if chk.ok else 1), rep, text


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffcrit",
                                description="Differential reduction, Delta-polynomials and criteria.")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    sub = p.add_subparsers(dest="command", required=True)

    def with_session(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--session", required=True, help="session file")
        return sp

    sp = with_session("reduce", "pseudo-reduce a polynomial")
    sp.add_argument("--target", required=True)
    sp.add_argument("--by", required=True, help="comma separated reducer names")
    sp.add_argument("--mode", choices=(PARTIAL, FULL), default=FULL)
    sp.set_defaults(fn=cmd_reduce)

    sp = with_session("spoly", "Delta-polynomial of a pair")
    sp.add_argument("--pair", required=True, help="A,B")
    sp.set_defaults(fn=cmd_spoly)

    sp = with_session("criterion", "check a witness")
    sp.add_argument("--witness", required=True, help="witness name or JSON witness file")
    sp.set_defaults(fn=cmd_criterion)

    sp = with_session("coherence", "reduce all Delta-polynomials of a set")
    sp.add_argument("--set", required=True)
    sp.set_defaults(fn=cmd_coherence)

    sp = with_session("complete", "pairwise completion")
    sp.add_argument("--set", required=True)
    sp.add_argument("--no-criterion", action="store_true")
    sp.add_argument("--max-steps", type=int, default=1000)
    sp.set_defaults(fn=cmd_complete)

    sp = with_session("kahler", "differential of a polynomial")
    sp.add_argument("--target", required=True)
    sp.add_argument("--gens", help="derivatives generating P (names of single-derivative polys)")
    sp.add_argument("--power", type=int, default=1)
    sp.add_argument("--charset", help="names of A_i for the power characteristic set check")
    sp.add_argument("--dexp", help="comma separated exponents d_i")
    sp.set_defaults(fn=cmd_kahler)

    sp = with_session("print", "print the session in canonical form")
    sp.set_defaults(fn=cmd_print)

    sp = sub.add_parser("example", help="replay a bundled example and assert its outcomes")
    sp.add_argument("n", type=int, choices=sorted(_EXAMPLES))
    sp.set_defaults(fn=None)
    return p


def _emit(args, status, report, text):
    if args.json:
        print(json.dumps(report | {"status": status}, indent=2))
    else:
        print("\n".join(text))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "example":
            status, report, text = run_example(args.n)
        else:
            s = load(args.session)
            status, report, text = args.fn(s, args)
    except (ParseError, UsageError, KeyError, TypeError, NotEssentialPair, NoLeaderError,
            ValueError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
        diag = {"error": type(e).__name__, "message": msg}
        if isinstance(e, ParseError):
            diag |= {"line": e.line, "column": e.col}
        if args.json:
            print(json.dumps(diag | {"status": 2}, indent=2))
        else:
            print(f"error: {diag['message']}", file=sys.stderr)
        return 2
    _emit(args, status, report, text)
    return status


if __name__ == "__main__":
    sys.exit(main())
