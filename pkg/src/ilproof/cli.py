"""Command-line front end.

Commands: parse, prove, check, translate, cutelim, interpolate, fixpoint.
Exit codes: 0 success/provable, 1 negative result, 2 error.  Numeric limits
can also be set through ILPROOF_* environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import interpolation, search, serialize, transform
from .formulas import FormulaError, Iff, Imp, fmt, parse
from .hilbert import HilbertError, check_hilbert
from .proofs import CheckError, CyclicProof, Proof, check_cyclic, check_proof
from .rules import CalculusId
from .sequents import ParseError, Sequent, fmt_sequent, parse_sequent

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2

ENV_PREFIX = "ILPROOF_"


def _env_int(name, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    return int(raw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ilproof",
        description="Sequent calculi, proof search and uniform interpolation "
        "for interpretability logic.",
    )
    ap.add_argument("--logic", choices=["il", "ilp"], default=os.environ.get(ENV_PREFIX + "LOGIC", "il"))
    ap.add_argument("--format", choices=["text", "json", "dot"], default="text")
    ap.add_argument("--max-nodes", type=int, default=_env_int("MAX_NODES", 10**6))
    ap.add_argument("--no-sugar", action="store_true", help="print core syntax only")
    sub = ap.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse a formula and print it back")
    p_parse.add_argument("formula")

    p_prove = sub.add_parser("prove", help="decide a sequent by backward search")
    p_prove.add_argument("sequent", nargs="?")
    p_prove.add_argument("--batch", help="file with one sequent per line")
    p_prove.add_argument("--emit", help="write the cyclic proof as JSON")
    p_prove.add_argument("--dot", help="write the cyclic proof as DOT")

    p_check = sub.add_parser("check", help="check a proof JSON file")
    p_check.add_argument("file")
    p_check.add_argument(
        "--calculus",
        choices=[c.value for c in CalculusId],
        help="overrides the calculus recorded in the file",
    )
    p_check.add_argument("--allow-assumptions", action="store_true")
    p_check.add_argument("--lint-subformula", action="store_true")

    p_tr = sub.add_parser("translate", help="translate between proof formats")
    p_tr.add_argument("file")
    p_tr.add_argument("--from", dest="source", required=True,
                      choices=["hilbert", "cyclic", "fgil-cut"])
    p_tr.add_argument("--to", dest="target", required=True,
                      choices=["fgil", "gil-prefix", "hilbert"])
    p_tr.add_argument("--fuel", type=int, default=2)
    p_tr.add_argument("--lambda", dest="lam", default="",
                      help="comma-separated formulas for the cyclic translation")
    p_tr.add_argument("--out", help="output file (default stdout)")

    p_ce = sub.add_parser("cutelim", help="replace a proof with cut by a cut-free one")
    p_ce.add_argument("file")
    p_ce.add_argument("--out")

    p_int = sub.add_parser("interpolate", help="compute a uniform interpolant")
    p_int.add_argument("formula")
    p_int.add_argument("--vocab", default="", help="comma-separated atoms")
    p_int.add_argument("--verify-cap", type=int, default=_env_int("WITNESS_CAP", 0),
                       help="verify against all vocabulary formulas up to this size")
    p_int.add_argument("--raw", action="store_true", help="skip simplification")
    p_int.add_argument("--emit-template", help="write the template as JSON")

    p_fix = sub.add_parser("fixpoint", help="solve x <-> phi(x) for a modalized x")
    p_fix.add_argument("formula")
    p_fix.add_argument("--var", required=True)
    p_fix.add_argument("--cap", type=int, default=_env_int("FIXPOINT_CAP", 0))
    return ap


def _limits(args) -> search.SearchLimits:
    return search.SearchLimits(max_nodes=args.max_nodes)


def _sugar(args) -> bool:
    return not args.no_sugar


def cmd_parse(args) -> int:
    f = parse(args.formula)
    print(fmt(f, sugar=_sugar(args)))
    return EXIT_OK


def _emit_proof(proof, calculus, args, emit, dot):
    if emit:
        with open(emit, "w") as handle:
            handle.write(serialize.dumps(serialize.proof_to_json(proof, calculus)))
    if dot:
        with open(dot, "w") as handle:
            handle.write(serialize.proof_to_dot(proof))


def _prove_one(text, args) -> int:
    seq = parse_sequent(text)
    outcome = search.prove(seq, _limits(args))
    if isinstance(outcome, search.Provable):
        check_cyclic(outcome.proof, CalculusId.GIL_SLIM)
        if args.format == "json":
            print(serialize.dumps(serialize.proof_to_json(outcome.proof, "gil-slim")), end="")
        elif args.format == "dot":
            print(serialize.proof_to_dot(outcome.proof), end="")
        else:
            print(f"provable: {fmt_sequent(seq)} "
                  f"({outcome.proof.node_count()} nodes, {outcome.stats.explored} explored)")
        _emit_proof(outcome.proof, "gil-slim", args, args.emit, args.dot)
        return EXIT_OK
    if isinstance(outcome, search.Unprovable):
        frontier = "; ".join(fmt_sequent(s) for s in outcome.frontier[:4])
        print(f"unprovable: {fmt_sequent(seq)} (saturated: {frontier})")
        return EXIT_NEGATIVE
    print(f"search exhausted after {outcome.explored} nodes")
    return EXIT_ERROR


def cmd_prove(args) -> int:
    if args.batch:
        worst = EXIT_OK
        with open(args.batch) as handle:
            for line in handle:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                code = _prove_one(line, args)
                worst = max(worst, code)
        return worst
    if not args.sequent:
        print("prove needs a sequent or --batch", file=sys.stderr)
        return EXIT_ERROR
    return _prove_one(args.sequent, args)


def _load_json(path):
    with open(path) as handle:
        return json.load(handle)


def cmd_check(args) -> int:
    obj = _load_json(args.file)
    calculus_name = args.calculus or obj.get("calculus") or "fgil"
    calculus = CalculusId(calculus_name)
    proof = serialize.proof_from_json(obj)
    try:
        if isinstance(proof, CyclicProof):
            check_cyclic(proof, calculus)
        else:
            check_proof(
                proof,
                calculus,
                allow_assumptions=args.allow_assumptions,
                subformula_lint=args.lint_subformula,
            )
    except CheckError as exc:
        print(f"check failed: {exc}")
        return EXIT_NEGATIVE
    print(f"ok: {calculus.value} proof with {proof.node_count()} nodes")
    return EXIT_OK


def _write_out(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        print(text, end="")


def cmd_translate(args) -> int:
    pair = (args.source, args.target)
    obj = _load_json(args.file)
    if pair == ("hilbert", "fgil"):
        h = serialize.hilbert_from_json(obj)
        out = transform.hilbert_to_sequent(h)
        check_proof(out, CalculusId.FGIL_CUT)
        _write_out(args, serialize.dumps(serialize.proof_to_json(out, "fgil-cut")))
        return EXIT_OK
    if pair == ("cyclic", "fgil"):
        proof = serialize.proof_from_json(obj)
        if not isinstance(proof, CyclicProof):
            from .proofs import cyclic_from_proof

            proof = cyclic_from_proof(proof)
        lam = tuple(parse(x) for x in args.lam.split(",") if x.strip())
        out = transform.cyclic_to_fgil(proof, frozenset(lam))
        check_proof(out, CalculusId.FGIL)
        _write_out(args, serialize.dumps(serialize.proof_to_json(out, "fgil")))
        return EXIT_OK
    if pair == ("fgil-cut", "gil-prefix"):
        proof = serialize.proof_from_json(obj)
        out = transform.alpha_prefix(proof, args.fuel)
        check_proof(out, CalculusId.GIL_CUT, allow_assumptions=True)
        _write_out(args, serialize.dumps(serialize.proof_to_json(out, "gil-cut")))
        return EXIT_OK
    if pair == ("fgil-cut", "hilbert"):
        proof = serialize.proof_from_json(obj)
        out = transform.sequent_to_hilbert(proof)
        check_hilbert(out, "il")
        _write_out(args, serialize.dumps(serialize.hilbert_to_json(out)))
        return EXIT_OK
    print(f"unsupported translation {pair[0]} -> {pair[1]}", file=sys.stderr)
    return EXIT_ERROR


def cmd_cutelim(args) -> int:
    obj = _load_json(args.file)
    proof = serialize.proof_from_json(obj)
    if not isinstance(proof, Proof):
        print("cutelim expects a wellfounded proof", file=sys.stderr)
        return EXIT_ERROR
    out = transform.eliminate_cuts_reprove(proof.sequent, proof)
    _write_out(args, serialize.dumps(serialize.proof_to_json(out, "fgil")))
    return EXIT_OK


def cmd_interpolate(args) -> int:
    f = parse(args.formula)
    voc = frozenset(x.strip() for x in args.vocab.split(",") if x.strip())
    limits = _limits(args)
    if args.logic == "ilp":
        iota = interpolation.ilp_interpolant(f, voc, limits, raw=args.raw)
    else:
        iota = interpolation.interpolant(f, voc, limits, raw=args.raw)
    if args.emit_template:
        t = interpolation.build_template(
            Sequent(((interpolation.sharp(f) if args.logic == "ilp" else f),), ()), voc
        )
        with open(args.emit_template, "w") as handle:
            handle.write(serialize.dumps(template_to_json(t)))
    print(fmt(iota, sugar=_sugar(args)))
    if args.verify_cap:
        report = interpolation.verify_interpolant(
            f, voc, iota, args.verify_cap, limits, logic=args.logic
        )
        print(
            f"verification: vocab={report.vocab_ok} implication={report.implication_ok} "
            f"witnesses={report.witnesses_checked} failures={len(report.failures)}"
        )
        if not report.ok:
            return EXIT_NEGATIVE
    return EXIT_OK


def template_to_json(t) -> dict:
    nodes = []
    for nid, n in enumerate(t.nodes):
        entry = {
            "id": nid,
            "sequent": {
                "left": [fmt(x) for x in n.sequent.left],
                "right": [fmt(x) for x in n.sequent.right],
            },
            "children": list(n.children),
            "backlink": n.backlink,
        }
        if isinstance(n.rule, interpolation.InterpStar):
            entry["rule"] = {
                "name": "InterpStar",
                "params": {
                    "premises": [
                        {
                            "phis": [fmt(x) for x in phis],
                            "psi": fmt(psi) if psi is not None else None,
                        }
                        for phis, psi in n.rule.index
                    ]
                },
            }
        else:
            entry["rule"] = serialize.rule_to_json(n.rule)
        nodes.append(entry)
    return {"calculus": "template", "nodes": nodes}


def cmd_fixpoint(args) -> int:
    f = parse(args.formula)
    cap = args.cap if args.cap else None
    psi = interpolation.fixpoint(f, args.var, _limits(args), cap)
    applied = interpolation.substitute(f, {args.var: psi})
    if not search.decide_il(Iff(psi, applied), _limits(args)):
        print("fixpoint candidate failed certification", file=sys.stderr)
        return EXIT_ERROR
    print(fmt(psi, sugar=_sugar(args)))
    return EXIT_OK


_COMMANDS = {
    "parse": cmd_parse,
    "prove": cmd_prove,
    "check": cmd_check,
    "translate": cmd_translate,
    "cutelim": cmd_cutelim,
    "interpolate": cmd_interpolate,
    "fixpoint": cmd_fixpoint,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, FormulaError) as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (
        CheckError,
        HilbertError,
        transform.ShapeMismatch,
        interpolation.InterpolationError,
        search.ResourceError,
        OSError,
        json.JSONDecodeError,
        KeyError,
        ValueError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
