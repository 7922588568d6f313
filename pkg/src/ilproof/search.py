"""Terminating backward proof search for the cyclic calculus.

The procedure applies, per sequent: closure rules, then branch-repeat
folding, then the invertible propositional rules eagerly, and finally
branches over every instance of the slim modal rule (every principal
``|>``-formula on the right, every duplicate-free ordering of left
``|>``-formulas).  Repeats fold on the branch history, which records the
sequents of modal premises and of modal branching points; between two equal
sequents on a branch the size must have grown back, which only the modal
rule can do, so every fold crosses a progressing premise (asserted).

Termination needs no artificial bound: the propositional phase strictly
shrinks sequents and the distinct modal-premise sequents are limited to
2^k * k^2 for k the number of closed subformulas of the root.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Optional, Tuple

from .formulas import Bot, Formula, sharp
from .proofs import CNode, CyclicProof, ax_proof
from .rules import Ax, BotL, BotR, CalculusId, ImpL, ImpR, InterpIK4Slim, Repeat
from .sequents import Sequent, mset, sub_sequent


class ResourceError(Exception):
    """A declared search limit was hit before a verdict was reached."""


@dataclass(frozen=True)
class SearchLimits:
    max_branch_repeats: Optional[int] = None
    max_nodes: int = 10**6
    max_orderings: Optional[int] = None
    success_memo: bool = False


DEFAULT_LIMITS = SearchLimits()


@dataclass
class SearchStats:
    explored: int = 0
    distinct_modal_premises: int = 0
    premise_bound: int = 0


@dataclass
class Provable:
    proof: CyclicProof
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class Unprovable:
    explored: int
    frontier: Tuple[Sequent, ...]
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class ResourceExhausted:
    explored: int
    stats: SearchStats = field(default_factory=SearchStats)


class _Exhausted(Exception):
    pass


class _Node:
    __slots__ = ("nid", "sequent", "rule", "children", "backlink")

    def __init__(self, nid, sequent, rule, children=(), backlink=None):
        self.nid = nid
        self.sequent = sequent
        self.rule = rule
        self.children = tuple(children)
        self.backlink = backlink


def _first_imp(formulas):
    for f in formulas:
        if f.is_imp():
            return f
    return None


def _orderings(candidates, max_orderings):
    """Duplicate-free orderings: injective sequences of distinct left
    ``|>``-formulas with pairwise distinct antecedents, longer first."""
    values = sorted(set(candidates), key=lambda f: f.key)
    distinct_ans = len({f.left for f in values})
    emitted = 0
    for length in range(distinct_ans, -1, -1):
        for perm in permutations(values, length):
            if len({f.left for f in perm}) != length:
                continue
            yield perm
            emitted += 1
            if max_orderings is not None and emitted >= max_orderings:
                return


_MAX_FRAMES = 30000
_STACK_BYTES = 512 * 1024 * 1024


class _Searcher:
    def __init__(self, root: Sequent, limits: SearchLimits):
        self.limits = limits
        self.counter = 0
        self.frames = 0
        self.frontier: List[Sequent] = []
        self.frontier_seen = set()
        self.modal_premises = set()
        self.memo: Dict[Sequent, _Node] = {}
        k = len(sub_sequent(root))
        self.premise_bound = (2**k) * k * k

    def fresh(self) -> int:
        self.counter += 1
        if self.counter > self.limits.max_nodes:
            raise _Exhausted()
        return self.counter

    def search(self, seq: Sequent, my_id: int, history, depth: int):
        self.frames += 1
        if self.frames > _MAX_FRAMES:
            raise _Exhausted()
        try:
            return self._search(seq, my_id, history, depth)
        finally:
            self.frames -= 1

    def _search(self, seq: Sequent, my_id: int, history, depth: int):
        """Backward search below one node; ``history`` maps branch sequents
        to (node id, progress depth).  Returns a closed `_Node` or None."""
        limits = self.limits
        left, right = seq.left, seq.right

        # (a) closure; shared |>-formulas close by the axiom expansion
        if Bot in left:
            return _Node(my_id, seq, BotL())
        shared = seq.shared_atoms()
        if shared:
            return _Node(my_id, seq, Ax(shared[0].name))
        for f in left:
            if f.is_interp() and f in right:
                rest = seq.remove(left=(f,), right=(f,))
                closed = ax_proof(f, rest.left, rest.right, CalculusId.GIL_SLIM)
                return self._embed(closed, my_id)

        # (b) fold on the branch history
        hit = history.get(seq)
        if hit is not None and hit[0] != my_id:
            hit_id, hit_depth = hit
            assert depth > hit_depth, "repeat without progress on the branch"
            return _Node(my_id, seq, Repeat(), backlink=hit_id)

        if limits.success_memo:
            cached = self.memo.get(seq)
            if cached is not None:
                return self._renumber(cached, my_id)

        # (c) eager invertible rules: BotR, ImpR, leftmost ImpL
        for rule in self._invertible(seq, left, right):
            prems = rule.premises(seq)
            kids = []
            for prem in prems:
                child = self.search(prem, self.fresh(), history, depth)
                if child is None:
                    return None
                kids.append(child)
            return self._finish(_Node(my_id, seq, rule, kids))

        # (d) modal branching; only atoms and |>-formulas remain
        if limits.max_branch_repeats is not None and len(history) >= limits.max_branch_repeats:
            raise _Exhausted()
        history2 = dict(history)
        history2[seq] = (my_id, depth)

        principals = []
        seen = set()
        for f in right:
            if f.is_interp() and f not in seen:
                seen.add(f)
                principals.append(f)
        left_interp = [f for f in left if f.is_interp()]

        for principal in principals:
            weak_right = seq.remove(right=(principal,)).right
            for ordering in _orderings(left_interp, limits.max_orderings):
                weak_left = seq.remove(left=ordering).left
                rule = InterpIK4Slim(
                    tuple((f.left, f.right) for f in ordering),
                    (principal.left, principal.right),
                    weak_left,
                    weak_right,
                )
                kids = []
                ok = True
                for prem in rule.premises(seq):
                    self.modal_premises.add(prem)
                    child_id = self.fresh()
                    child_history = dict(history2)
                    child_history[prem] = (child_id, depth + 1)
                    child = self.search(prem, child_id, child_history, depth + 1)
                    if child is None:
                        ok = False
                        break
                    kids.append(child)
                if ok:
                    return self._finish(_Node(my_id, seq, rule, kids))

        # (e) saturated or failed leaf
        if not principals and seq not in self.frontier_seen:
            self.frontier_seen.add(seq)
            self.frontier.append(seq)
        return None

    def _invertible(self, seq, left, right):
        if Bot in right:
            yield BotR()
            return
        imp_r = _first_imp(right)
        if imp_r is not None:
            yield ImpR(imp_r.left, imp_r.right)
            return
        imp_l = _first_imp(left)
        if imp_l is not None:
            yield ImpL(imp_l.left, imp_l.right)

    def _finish(self, node: _Node) -> _Node:
        if self.limits.success_memo and _self_contained(node):
            self.memo.setdefault(node.sequent, node)
        return node

    def _embed(self, proof, my_id=None) -> _Node:
        nid = self.fresh() if my_id is None else my_id
        return _Node(
            nid,
            proof.sequent,
            proof.rule,
            tuple(self._embed(c) for c in proof.children),
        )

    def _renumber(self, node: _Node, root_id: int) -> _Node:
        mapping = {}
        order = list(_iter_nodes(node))
        mapping[node.nid] = root_id
        for n in order:
            if n.nid not in mapping:
                mapping[n.nid] = self.fresh()

        def rebuild(n):
            return _Node(
                mapping[n.nid],
                n.sequent,
                n.rule,
                tuple(rebuild(c) for c in n.children),
                mapping[n.backlink] if n.backlink is not None else None,
            )

        return rebuild(node)


def _iter_nodes(node):
    yield node
    for c in node.children:
        yield from _iter_nodes(c)


def _self_contained(node):
    ids = {n.nid for n in _iter_nodes(node)}
    return all(
        n.backlink is None or n.backlink in ids for n in _iter_nodes(node)
    )


def _flatten(root) -> CyclicProof:
    """Renumber to dense preorder ids and emit a CyclicProof."""
    order = list(_iter_nodes(root))
    remap = {n.nid: i for i, n in enumerate(order)}
    nodes: List[Optional[CNode]] = [None] * len(order)
    for n in order:
        nodes[remap[n.nid]] = CNode(
            n.sequent,
            n.rule,
            tuple(remap[c.nid] for c in n.children),
            remap[n.backlink] if n.backlink is not None else None,
        )
    return CyclicProof(nodes)


def _run_deep(fn):
    """Run a deeply recursive computation on a worker thread with a large
    stack; the recursion is bounded separately by `_MAX_FRAMES`."""
    box = {}

    def worker():
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, _MAX_FRAMES * 3))
        try:
            box["out"] = fn()
        except BaseException as exc:  # surfaced on the caller's thread
            box["err"] = exc
        finally:
            sys.setrecursionlimit(old_limit)

    old_size = threading.stack_size(_STACK_BYTES)
    try:
        thread = threading.Thread(target=worker, daemon=True)
        thread.start()
        thread.join()
    finally:
        threading.stack_size(old_size)
    if "err" in box:
        raise box["err"]
    return box["out"]


def prove(sequent: Sequent, limits: SearchLimits = DEFAULT_LIMITS):
    """Decide a sequent; returns Provable carrying a checkable cyclic proof,
    Unprovable carrying the saturated frontier, or ResourceExhausted."""
    searcher = _Searcher(sequent, limits)
    stats = SearchStats(premise_bound=searcher.premise_bound)

    try:
        root = _run_deep(lambda: searcher.search(sequent, searcher.fresh(), {}, 0))
    except _Exhausted:
        stats.explored = searcher.counter
        stats.distinct_modal_premises = len(searcher.modal_premises)
        return ResourceExhausted(searcher.counter, stats)

    stats.explored = searcher.counter
    stats.distinct_modal_premises = len(searcher.modal_premises)
    assert stats.distinct_modal_premises <= stats.premise_bound, (
        "modal premise variety exceeded the structural bound"
    )
    if root is None:
        return Unprovable(searcher.counter, tuple(searcher.frontier), stats)
    return Provable(_flatten(root), stats)


def decide_il(f: Formula, limits: SearchLimits = DEFAULT_LIMITS) -> bool:
    """Provability in il via cut-free backward search."""
    outcome = prove(Sequent((), (f,)), limits)
    if isinstance(outcome, ResourceExhausted):
        raise ResourceError(f"search exhausted while deciding {f}")
    return isinstance(outcome, Provable)


def decide_ilp(f: Formula, limits: SearchLimits = DEFAULT_LIMITS) -> bool:
    """Provability in ilp, via the persistence-eliminating translation."""
    return decide_il(sharp(f), limits)
