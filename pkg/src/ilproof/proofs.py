"""Proof objects and their checkers.

``Proof`` is a finite rule-annotated tree (possibly with open assumption
leaves); ``CyclicProof`` is a finite tree whose Repeat leaves carry a
backlink to a strict ancestor with the same sequent.  Checking is local:
every node's children must match the premises its rule application computes
from the node's sequent; cyclic proofs additionally need each backlink path
to cross a progressing premise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .formulas import Atom, Bot, Formula, Imp, Interp, subformulas
from .rules import (
    Assumption,
    Ax,
    BotL,
    BotR,
    CalculusId,
    Cut,
    Equiv,
    ImpL,
    ImpR,
    InterpIK4,
    InterpIK4Slim,
    InterpIL,
    Repeat,
    RuleApp,
    RuleMismatch,
    admits,
)
from .sequents import Sequent, sub_sequent


class CheckError(Exception):
    def __init__(self, reason: str, path=(), code: str = "RuleError"):
        super().__init__(f"{code} at node {list(path)}: {reason}")
        self.reason = reason
        self.path = tuple(path)
        self.code = code


class Proof:
    """Finite proof tree; leaves with an ``Assumption`` rule are open."""

    __slots__ = ("sequent", "rule", "children")

    def __init__(self, sequent: Sequent, rule: RuleApp, children: Tuple["Proof", ...] = ()):
        self.sequent = sequent
        self.rule = rule
        self.children = tuple(children)

    def __eq__(self, other):
        return (
            isinstance(other, Proof)
            and self.sequent == other.sequent
            and self.rule == other.rule
            and self.children == other.children
        )

    def __repr__(self):
        return f"Proof({self.sequent}, {self.rule.name}, {len(self.children)} children)"

    def is_assumption(self) -> bool:
        return isinstance(self.rule, Assumption)

    def height(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.height() for c in self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def iter_nodes(self, path=()):
        yield path, self
        for i, c in enumerate(self.children):
            yield from c.iter_nodes(path + (i,))

    def assumptions(self) -> List[Sequent]:
        return [n.sequent for _, n in self.iter_nodes() if n.is_assumption()]

    def uses_rule(self, rule_type) -> bool:
        return any(isinstance(n.rule, rule_type) for _, n in self.iter_nodes())


def node(sequent: Sequent, rule: RuleApp, *children: Proof) -> Proof:
    return Proof(sequent, rule, children)


def assumption(sequent: Sequent) -> Proof:
    return Proof(sequent, Assumption())


@dataclass(frozen=True)
class CNode:
    sequent: Sequent
    rule: RuleApp
    children: Tuple[int, ...] = ()
    backlink: Optional[int] = None


class CyclicProof:
    """Flat tree of nodes indexed by id; node 0 is the root."""

    def __init__(self, nodes: List[CNode]):
        self.nodes = list(nodes)

    @property
    def root(self) -> CNode:
        return self.nodes[0]

    def parent_map(self):
        parent = {}
        for nid, n in enumerate(self.nodes):
            for c in n.children:
                parent[c] = nid
        return parent

    def ancestors(self, nid: int, parent=None):
        parent = parent if parent is not None else self.parent_map()
        out = []
        while nid in parent:
            nid = parent[nid]
            out.append(nid)
        return out

    def node_count(self) -> int:
        return len(self.nodes)


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------


def check_proof(
    proof: Proof,
    calculus: CalculusId,
    allow_assumptions: bool = False,
    subformula_lint: bool = False,
) -> None:
    """Validate a finite proof tree; raises CheckError on the first defect."""
    allowed = sub_sequent(proof.sequent) if subformula_lint else None
    _check_node(proof, calculus, allow_assumptions, allowed, ())


def _check_node(p: Proof, calculus, allow_assumptions, allowed, path):
    if p.is_assumption():
        if not allow_assumptions:
            raise CheckError("assumption leaf not allowed", path)
        return
    if isinstance(p.rule, Repeat):
        raise CheckError("Repeat is only valid inside a cyclic proof", path)
    if not admits(calculus, p.rule):
        raise CheckError(f"rule {p.rule.name} not admitted in {calculus.value}", path)
    if isinstance(p.rule, Equiv):
        _check_equiv_certificate(p.rule, path)
    try:
        premises = p.rule.premises(p.sequent)
    except RuleMismatch as exc:
        raise CheckError(str(exc), path)
    if len(premises) != len(p.children):
        raise CheckError(
            f"rule {p.rule.name} needs {len(premises)} premises, has {len(p.children)}",
            path,
        )
    for i, (want, child) in enumerate(zip(premises, p.children)):
        if child.sequent != want:
            raise CheckError(
                f"premise {i} of {p.rule.name} must be {want}, found {child.sequent}",
                path + (i,),
            )
    if allowed is not None:
        for f in p.sequent.left + p.sequent.right:
            if f not in allowed:
                raise CheckError(f"formula {f} escapes the root subformulas", path)
    for i, child in enumerate(p.children):
        _check_node(child, calculus, allow_assumptions, allowed, path + (i,))


def _check_equiv_certificate(rule: Equiv, path):
    from .formulas import Iff
    from . import hilbert

    cert = rule.certificate
    if cert is None:
        raise CheckError("Equiv application carries no certificate", path)
    want = Iff(rule.premise_formula, rule.conclusion_formula)
    if not cert.lines or cert.lines[-1].formula != want:
        raise CheckError("Equiv certificate proves the wrong formula", path)
    try:
        hilbert.check_hilbert(cert, "il")
    except hilbert.HilbertCheckError as exc:
        raise CheckError(f"Equiv certificate rejected: {exc}", path)


def check_cyclic(
    proof: CyclicProof, calculus: CalculusId = CalculusId.GIL_SLIM
) -> None:
    """Validate a cyclic proof: local rule correctness, well-placed
    backlinks, and progress on every cycle."""
    refs = [c for n in proof.nodes for c in n.children]
    if len(refs) != len(set(refs)) or 0 in refs:
        raise CheckError("malformed tree: duplicate or root child reference", ())
    if any(not 0 <= c < len(proof.nodes) for c in refs):
        raise CheckError("malformed tree: child id out of range", ())
    reachable = set()
    stack = [0]
    while stack:
        nid = stack.pop()
        if nid in reachable:
            raise CheckError("malformed tree: child cycle", (nid,))
        reachable.add(nid)
        stack.extend(proof.nodes[nid].children)
    if len(reachable) != len(proof.nodes):
        raise CheckError("malformed tree: unreachable nodes", ())
    parent = proof.parent_map()
    for nid, n in enumerate(proof.nodes):
        if isinstance(n.rule, Repeat):
            target = n.backlink
            if target is None or not (0 <= target < len(proof.nodes)):
                raise CheckError("missing or dangling backlink", (nid,), code="BadTarget")
            if target not in proof.ancestors(nid, parent):
                raise CheckError("backlink target is not a strict ancestor", (nid,), code="BadTarget")
            if proof.nodes[target].sequent != n.sequent:
                raise CheckError("backlink target sequent differs", (nid,), code="BadTarget")
            if not _path_progresses(proof, target, nid, parent):
                raise CheckError("no progressing premise on the cycle", (nid,), code="NoProgress")
            continue
        if isinstance(n.rule, Assumption):
            raise CheckError("cyclic proofs are closed; no assumptions", (nid,))
        if not admits(calculus, n.rule):
            raise CheckError(
                f"rule {n.rule.name} not admitted in {calculus.value}", (nid,)
            )
        try:
            premises = n.rule.premises(n.sequent)
        except RuleMismatch as exc:
            raise CheckError(str(exc), (nid,))
        if len(premises) != len(n.children):
            raise CheckError(
                f"rule {n.rule.name} needs {len(premises)} premises", (nid,)
            )
        for want, cid in zip(premises, n.children):
            if proof.nodes[cid].sequent != want:
                raise CheckError(
                    f"premise of {n.rule.name} must be {want}, found {proof.nodes[cid].sequent}",
                    (nid, cid),
                )


def _path_progresses(proof: CyclicProof, top: int, leaf: int, parent) -> bool:
    nid = leaf
    while nid != top:
        up = parent[nid]
        n = proof.nodes[up]
        if n.rule.progressing and nid in n.children:
            return True
        nid = up
    return False


# ---------------------------------------------------------------------------
# Local fragments
# ---------------------------------------------------------------------------


def main_fragment(proof) -> Tuple[Proof, List[Sequent]]:
    """Maximal rooted region crossing no progressing premise.

    Returns a copy of the region with boundary premises as assumption leaves,
    together with the boundary sequents.  Accepts finite proofs and cyclic
    proofs; in a cyclic proof backlinks are followed, which terminates since
    every cycle crosses a progressing premise.
    """
    boundary: List[Sequent] = []
    if isinstance(proof, Proof):

        def walk(p: Proof) -> Proof:
            if p.rule.progressing:
                kids = []
                for c in p.children:
                    boundary.append(c.sequent)
                    kids.append(assumption(c.sequent))
                return Proof(p.sequent, p.rule, tuple(kids))
            return Proof(p.sequent, p.rule, tuple(walk(c) for c in p.children))

        return walk(proof), boundary

    def walkc(nid: int) -> Proof:
        n = proof.nodes[nid]
        if isinstance(n.rule, Repeat):
            # A repeat inside the main fragment would be a progress-free
            # cycle, which check_cyclic rejects.
            raise CheckError("cycle without progress", (nid,), code="NoProgress")
        if n.rule.progressing:
            kids = []
            for c in n.children:
                boundary.append(proof.nodes[c].sequent)
                kids.append(assumption(proof.nodes[c].sequent))
            return Proof(n.sequent, n.rule, tuple(kids))
        return Proof(n.sequent, n.rule, tuple(walkc(c) for c in n.children))

    return walkc(0), boundary


def local_height(proof) -> int:
    """Height of the main local fragment; a progressing root alone is 0."""
    if isinstance(proof, Proof):

        def h(p: Proof) -> int:
            if p.rule.progressing or not p.children:
                return 0
            return 1 + max(h(c) for c in p.children)

        return h(proof)

    def hc(nid: int) -> int:
        n = proof.nodes[nid]
        if isinstance(n.rule, Repeat):
            raise CheckError("cycle without progress", (nid,), code="NoProgress")
        if n.rule.progressing or not n.children:
            return 0
        return 1 + max(hc(c) for c in n.children)

    return hc(0)


# ---------------------------------------------------------------------------
# Elementary constructors
# ---------------------------------------------------------------------------


def ax_proof(phi: Formula, gamma=(), delta=(), calculus: CalculusId = CalculusId.FGIL) -> Proof:
    """Proof of ``phi, gamma => phi, delta`` by recursion on ``phi``.

    In the wellfounded calculus the ``|>`` case is a one-element-ordering
    instance of the diagonal modal rule; in the non-wellfounded calculus it
    uses the diagonal-free rule.
    """
    gamma = tuple(gamma)
    delta = tuple(delta)
    seq = Sequent((phi,) + gamma, (phi,) + delta)
    if phi.is_atom():
        return node(seq, Ax(phi.name))
    if phi.is_bot():
        return node(seq, BotL())
    if phi.is_imp():
        a, b = phi.left, phi.right
        # ImpR then ImpL over two smaller instances.
        inner = Sequent((a, phi) + gamma, (b,) + delta)
        left_pf = ax_proof(a, gamma, (b,) + delta, calculus)
        right_pf = ax_proof(b, (a,) + gamma, delta, calculus)
        imp_l = node(inner, ImpL(a, b), left_pf, right_pf)
        return node(seq, ImpR(a, b), imp_l)
    a, b = phi.left, phi.right
    ordering = ((a, b),)
    principal = (a, b)
    if calculus in (CalculusId.FGIL, CalculusId.FGIL_CUT):
        rule = InterpIL(ordering, principal, gamma, delta)
        prem1 = ax_proof(a, (Interp(a, Bot), Interp(a, Bot), Interp(b, Bot)), (b,), calculus)
        prem0 = ax_proof(b, (Interp(b, Bot), Interp(b, Bot)), (), calculus)
    else:
        cls = InterpIK4Slim if calculus == CalculusId.GIL_SLIM else InterpIK4
        rule = cls(ordering, principal, gamma, delta)
        prem1 = ax_proof(a, (Interp(a, Bot), Interp(b, Bot)), (b,), calculus)
        prem0 = ax_proof(b, (Interp(b, Bot),), (), calculus)
    return node(seq, rule, prem1, prem0)


class ShapeMismatch(Exception):
    pass


def derived_rule(kind: str, args, premises) -> Proof:
    """Expansion proofs for the derived boolean rules.

    ``kind`` is one of negL, negR, orL, orR, andL, andR; ``args`` the
    principal subformulas; ``premises`` the proofs of the rule's premises.
    """
    from .formulas import And, Neg, Or

    premises = list(premises)

    def ctx_minus(p, left=(), right=()):
        try:
            return p.sequent.remove(left=left, right=right)
        except ValueError:
            raise ShapeMismatch(
                f"premise {p.sequent} lacks {left}/{right} for {kind}"
            )

    if kind == "negL":
        (phi,) = args
        (p0,) = premises
        ctx = ctx_minus(p0, right=(phi,))
        bot_leaf = node(ctx.add(left=(Bot,)), BotL())
        return node(ctx.add(left=(Neg(phi),)), ImpL(phi, Bot), p0, bot_leaf)
    if kind == "negR":
        (phi,) = args
        (p0,) = premises
        ctx = ctx_minus(p0, left=(phi,))
        bot_r = node(p0.sequent.add(right=(Bot,)), BotR(), p0)
        return node(ctx.add(right=(Neg(phi),)), ImpR(phi, Bot), bot_r)
    if kind == "orL":
        phi, psi = args
        p0, p1 = premises
        ctx = ctx_minus(p0, left=(phi,))
        if ctx_minus(p1, left=(psi,)) != ctx:
            raise ShapeMismatch("orL premises have different contexts")
        neg_r = derived_rule("negR", (phi,), [p0])
        return node(ctx.add(left=(Or(phi, psi),)), ImpL(Neg(phi), psi), neg_r, p1)
    if kind == "orR":
        phi, psi = args
        (p0,) = premises
        ctx = ctx_minus(p0, right=(phi, psi))
        neg_l = derived_rule("negL", (phi,), [p0])
        return node(ctx.add(right=(Or(phi, psi),)), ImpR(Neg(phi), psi), neg_l)
    if kind == "andL":
        phi, psi = args
        (p0,) = premises
        ctx = ctx_minus(p0, left=(phi, psi))
        neg_r = derived_rule("negR", (psi,), [p0])
        imp_r = node(
            ctx.add(right=(Imp(phi, Neg(psi)),)), ImpR(phi, Neg(psi)), neg_r
        )
        return derived_rule("negL", (Imp(phi, Neg(psi)),), [imp_r])
    if kind == "andR":
        phi, psi = args
        p0, p1 = premises
        ctx = ctx_minus(p0, right=(phi,))
        if ctx_minus(p1, right=(psi,)) != ctx:
            raise ShapeMismatch("andR premises have different contexts")
        neg_l = derived_rule("negL", (psi,), [p1])
        imp_l = node(ctx.add(left=(Imp(phi, Neg(psi)),)), ImpL(phi, Neg(psi)), p0, neg_l)
        return derived_rule("negR", (Imp(phi, Neg(psi)),), [imp_l])
    raise ShapeMismatch(f"unknown derived rule {kind}")


def unfold(proof: CyclicProof, fuel: int) -> Proof:
    """Expand backlinks, at most ``fuel`` expansions per branch; leftover
    Repeat leaves become assumptions."""

    def go(nid: int, remaining: int) -> Proof:
        n = proof.nodes[nid]
        if isinstance(n.rule, Repeat):
            if remaining > 0:
                return go(n.backlink, remaining - 1)
            return assumption(n.sequent)
        return Proof(n.sequent, n.rule, tuple(go(c, remaining) for c in n.children))

    return go(0, fuel)


def cyclic_from_proof(p: Proof) -> CyclicProof:
    """View a finite (Repeat-free) proof as a cyclic proof object."""
    nodes: List[CNode] = []

    def go(q: Proof) -> int:
        nid = len(nodes)
        nodes.append(None)
        kids = tuple(go(c) for c in q.children)
        nodes[nid] = CNode(q.sequent, q.rule, kids, None)
        return nid

    go(p)
    return CyclicProof(nodes)
