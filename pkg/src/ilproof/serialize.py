"""JSON and DOT serialization for proofs, Hilbert proofs and templates.

Proof JSON schema::

    {"calculus": str,
     "nodes": [{"id": int,
                "sequent": {"left": [str], "right": [str]},
                "rule": {"name": str, "params": {...}},
                "children": [int],
                "backlink": int | null}]}

Node 0 is the root; formulas are written in the surface grammar; modal-rule
premises are listed left-to-right from the principal premise downwards.
"""

from __future__ import annotations

import json
from typing import List, Union

from .formulas import Formula, fmt, parse
from .hilbert import AxiomJust, HilbertLine, HilbertProof, MP, Nec, Taut
from .proofs import CNode, CyclicProof, Proof
from .rules import (
    Assumption,
    Ax,
    BotL,
    BotR,
    Ctr,
    Cut,
    Empty,
    Equiv,
    ImpL,
    ImpR,
    InterpIK4,
    InterpIK4Slim,
    InterpIL,
    Repeat,
    RuleApp,
    Wk,
)


class SerializationError(Exception):
    pass


def _fml(f: Formula) -> str:
    return fmt(f)


def _fmls(fs) -> List[str]:
    return [fmt(f) for f in fs]


def rule_to_json(rule: RuleApp) -> dict:
    params = {}
    if isinstance(rule, Ax):
        params = {"atom": rule.atom}
    elif isinstance(rule, (ImpL, ImpR)):
        params = {"phi": _fml(rule.phi), "psi": _fml(rule.psi)}
    elif isinstance(rule, (InterpIL, InterpIK4, InterpIK4Slim)):
        params = {
            "ordering": [[_fml(a), _fml(b)] for a, b in rule.ordering],
            "principal": [_fml(rule.principal[0]), _fml(rule.principal[1])],
            "weak_left": _fmls(rule.weak_left),
            "weak_right": _fmls(rule.weak_right),
        }
    elif isinstance(rule, Cut):
        params = {"chi": _fml(rule.chi)}
    elif isinstance(rule, Wk):
        params = {"add_left": _fmls(rule.add_left), "add_right": _fmls(rule.add_right)}
    elif isinstance(rule, Ctr):
        params = {"dup_left": _fmls(rule.dup_left), "dup_right": _fmls(rule.dup_right)}
    elif isinstance(rule, Equiv):
        params = {
            "from": _fml(rule.premise_formula),
            "to": _fml(rule.conclusion_formula),
            "side": rule.side,
            "certificate": hilbert_to_json(rule.certificate)
            if rule.certificate is not None
            else None,
        }
    return {"name": rule.name, "params": params}


def rule_from_json(obj: dict) -> RuleApp:
    name = obj.get("name")
    params = obj.get("params", {})

    def fml(key):
        return parse(params[key])

    def fmls(key):
        return tuple(parse(s) for s in params.get(key, []))

    if name == "Ax":
        return Ax(params["atom"])
    if name == "BotL":
        return BotL()
    if name == "BotR":
        return BotR()
    if name == "ImpL":
        return ImpL(fml("phi"), fml("psi"))
    if name == "ImpR":
        return ImpR(fml("phi"), fml("psi"))
    if name in ("InterpIL", "InterpIK4", "InterpIK4Slim"):
        ordering = tuple((parse(a), parse(b)) for a, b in params["ordering"])
        principal = (parse(params["principal"][0]), parse(params["principal"][1]))
        cls = {"InterpIL": InterpIL, "InterpIK4": InterpIK4, "InterpIK4Slim": InterpIK4Slim}[name]
        return cls(ordering, principal, fmls("weak_left"), fmls("weak_right"))
    if name == "Cut":
        return Cut(fml("chi"))
    if name == "Wk":
        return Wk(fmls("add_left"), fmls("add_right"))
    if name == "Ctr":
        return Ctr(fmls("dup_left"), fmls("dup_right"))
    if name == "Equiv":
        cert = params.get("certificate")
        return Equiv(
            fml("from"),
            fml("to"),
            params.get("side", "left"),
            hilbert_from_json(cert) if cert is not None else None,
        )
    if name == "Empty":
        return Empty()
    if name == "Repeat":
        return Repeat()
    if name == "Assumption":
        return Assumption()
    raise SerializationError(f"unknown rule name {name!r}")


def _sequent_json(s) -> dict:
    return {"left": _fmls(s.left), "right": _fmls(s.right)}


def _sequent_from_json(obj) -> "Sequent":
    from .sequents import Sequent

    return Sequent(
        tuple(parse(f) for f in obj["left"]),
        tuple(parse(f) for f in obj["right"]),
    )


def proof_to_json(proof: Union[Proof, CyclicProof], calculus: str = "") -> dict:
    nodes = []
    if isinstance(proof, Proof):

        def collect(p):
            nid = len(nodes)
            nodes.append(None)
            kid_ids = [collect(c) for c in p.children]
            nodes[nid] = {
                "id": nid,
                "sequent": _sequent_json(p.sequent),
                "rule": rule_to_json(p.rule),
                "children": kid_ids,
                "backlink": None,
            }
            return nid

        collect(proof)
    else:
        for nid, n in enumerate(proof.nodes):
            nodes.append(
                {
                    "id": nid,
                    "sequent": _sequent_json(n.sequent),
                    "rule": rule_to_json(n.rule),
                    "children": list(n.children),
                    "backlink": n.backlink,
                }
            )
    return {"calculus": calculus, "nodes": nodes}


def proof_from_json(obj: dict) -> Union[Proof, CyclicProof]:
    """Rebuild a proof; returns a CyclicProof when any backlink or Repeat is
    present, otherwise a recursive Proof tree."""
    raw = obj["nodes"]
    if not raw:
        raise SerializationError("proof has no nodes")
    by_id = {}
    for entry in raw:
        by_id[entry["id"]] = entry
    cyclic = any(
        entry.get("backlink") is not None or entry["rule"]["name"] == "Repeat"
        for entry in raw
    )
    if cyclic:
        ids = sorted(by_id)
        remap = {old: new for new, old in enumerate(ids)}
        nodes = []
        for old in ids:
            entry = by_id[old]
            nodes.append(
                CNode(
                    _sequent_from_json(entry["sequent"]),
                    rule_from_json(entry["rule"]),
                    tuple(remap[c] for c in entry["children"]),
                    remap[entry["backlink"]]
                    if entry.get("backlink") is not None
                    else None,
                )
            )
        return CyclicProof(nodes)

    def build(nid):
        entry = by_id[nid]
        return Proof(
            _sequent_from_json(entry["sequent"]),
            rule_from_json(entry["rule"]),
            tuple(build(c) for c in entry["children"]),
        )

    root_id = raw[0]["id"]
    return build(root_id)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Hilbert proofs
# ---------------------------------------------------------------------------


def hilbert_to_json(h: HilbertProof, logic: str = "il") -> dict:
    lines = []
    for line in h.lines:
        just = line.just
        if isinstance(just, Taut):
            j = {"type": "taut"}
        elif isinstance(just, AxiomJust):
            j = {"type": "axiom", "scheme": just.scheme, "args": _fmls(just.args)}
        elif isinstance(just, MP):
            # 0-based references: `imp` proves arg -> line, `arg` proves arg.
            j = {"type": "mp", "imp": just.imp, "arg": just.arg}
        elif isinstance(just, Nec):
            j = {"type": "nec", "from": just.source}
        else:
            raise SerializationError(f"unknown justification {just!r}")
        lines.append({"formula": _fml(line.formula), "just": j})
    return {"logic": logic, "lines": lines}


def hilbert_from_json(obj: dict) -> HilbertProof:
    lines = []
    for entry in obj["lines"]:
        j = entry["just"]
        kind = j["type"]
        if kind == "taut":
            just = Taut()
        elif kind == "axiom":
            just = AxiomJust(j["scheme"], tuple(parse(a) for a in j["args"]))
        elif kind == "mp":
            just = MP(j["imp"], j["arg"])
        elif kind == "nec":
            just = Nec(j["from"])
        else:
            raise SerializationError(f"unknown justification type {kind!r}")
        lines.append(HilbertLine(parse(entry["formula"]), just))
    return HilbertProof(tuple(lines))


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def proof_to_dot(proof: Union[Proof, CyclicProof], title: str = "proof") -> str:
    obj = proof_to_json(proof)
    lines = [f'digraph "{_dot_escape(title)}" {{', "  rankdir=BT;"]
    for entry in obj["nodes"]:
        seq = entry["sequent"]
        label = ", ".join(seq["left"]) + " => " + ", ".join(seq["right"])
        rule = entry["rule"]["name"]
        lines.append(
            f'  n{entry["id"]} [shape=box, label="{_dot_escape(label)}\\n[{rule}]"];'
        )
    for entry in obj["nodes"]:
        for c in entry["children"]:
            lines.append(f'  n{c} -> n{entry["id"]};')
        if entry.get("backlink") is not None:
            lines.append(f'  n{entry["id"]} -> n{entry["backlink"]} [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
