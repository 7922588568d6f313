"""Uniform interpolation via interpolation templates.

A template is a deterministic, contraction-disciplined cyclic proof search
over an extended rule set whose modal step enumerates every premise shape at
once.  Each node gets a pre-interpolant; Repeat nodes introduce bound
variables, giving a modal equational system whose solution (computed by
validated fixpoint iteration) turns the root pre-interpolant into the
uniform interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Optional, Tuple

from .formulas import (
    Atom,
    Bot,
    Formula,
    Iff,
    Imp,
    Interp,
    Neg,
    RESERVED_PREFIX,
    Top,
    big_and,
    big_or,
    check_vocabulary,
    fmt,
    modalized_in,
    sharp,
    size,
    substitute,
    vocabulary,
)
from .rules import Ax, BotL, BotR, Empty, ImpL, ImpR, Repeat, RuleApp, Wk
from .search import DEFAULT_LIMITS, SearchLimits, decide_il, decide_ilp
from .sequents import Sequent, an, interp_bot, mset, mset_set, su


class InterpolationError(Exception):
    pass


class TemplateCheckError(InterpolationError):
    def __init__(self, nid, reason):
        super().__init__(f"node {nid}: {reason}")
        self.nid = nid
        self.reason = reason


class NotModalized(InterpolationError):
    pass


class FixpointNotFound(InterpolationError):
    pass


class NotOrderable(InterpolationError):
    pass


MAX_STAR_PREMISES = 4096


@dataclass(frozen=True)
class InterpStar(RuleApp):
    """Modal template rule: one premise per pair of an antecedent multiset
    and an optional succedent-or-antecedent formula."""

    index: Tuple[Tuple[Tuple[Formula, ...], Optional[Formula]], ...]
    name = "InterpStar"
    progressing = True

    def arity(self):
        return len(self.index)

    def premises(self, conclusion):
        return [star_premise(phis, psi) for phis, psi in self.index]


def star_premise(phis: Tuple[Formula, ...], psi: Optional[Formula]) -> Sequent:
    left = (() if psi is None else (psi,)) + interp_bot(phis)
    return Sequent(left, phis)


def star_index(sigma, lam) -> Tuple:
    """All premise indices for a modal template node: sub-multisets of the
    antecedents of ``sigma`` plus at most one succedent of ``lam``, paired
    with a succedent of ``sigma``, an antecedent of ``lam`` or nothing."""
    ans = an(sigma)
    lam_sus = sorted(set(su(lam)), key=lambda f: f.key)
    psis = sorted(set(su(sigma)) | set(an(lam)), key=lambda f: f.key)

    base: List[Tuple[Formula, ...]] = [()]
    for a in set(ans):
        copies = sum(1 for x in ans if x == a)
        base = [b + (a,) * i for b in base for i in range(copies + 1)]
    phis_set = set()
    for b in base:
        phis_set.add(mset(b))
        for w in lam_sus:
            phis_set.add(mset(b + (w,)))
    phis_sorted = sorted(phis_set, key=lambda t: tuple(f.key for f in t))
    index = []
    for phis in phis_sorted:
        for psi in [None] + psis:
            index.append((phis, psi))
    if len(index) > MAX_STAR_PREMISES:
        raise InterpolationError(
            f"modal template step needs {len(index)} premises, over the cap"
        )
    return tuple(index)


@dataclass(frozen=True)
class TNode:
    sequent: Sequent
    rule: RuleApp
    children: Tuple[int, ...] = ()
    backlink: Optional[int] = None


class Template:
    """Flat template tree; node 0 is the root."""

    def __init__(self, nodes: List[TNode]):
        self.nodes = list(nodes)

    @property
    def root_sequent(self) -> Sequent:
        return self.nodes[0].sequent

    def node_count(self) -> int:
        return len(self.nodes)

    def parent_map(self):
        parent = {}
        for nid, n in enumerate(self.nodes):
            for c in n.children:
                parent[c] = nid
        return parent


def _is_atoms_and_interps(formulas) -> bool:
    return all(f.is_atom() or f.is_interp() for f in formulas)


def _instruction(seq: Sequent):
    """The deterministic rule choice for a set-sequent, ignoring repeats."""
    if Bot in seq.left:
        return BotL()
    shared = seq.shared_atoms()
    if shared:
        return Ax(shared[0].name)
    if not seq.left and not seq.right:
        return Empty()
    if Bot in seq.right:
        return BotR()
    for f in seq.left:
        if f.is_imp():
            return ImpL(f.left, f.right)
    for f in seq.right:
        if f.is_imp():
            return ImpR(f.left, f.right)
    sigma = tuple(f for f in seq.left if f.is_interp())
    lam = tuple(f for f in seq.right if f.is_interp())
    return InterpStar(star_index(sigma, lam))


def build_template(s: Sequent, voc=frozenset()) -> Template:
    """Construct the interpolation template of a sequent.

    The construction is deterministic: non-set-sequents contract first, the
    closure and invertible instructions fire in a fixed order (choosing the
    least principal formula), a repeated set-sequent on the branch becomes a
    Repeat, and otherwise the modal template rule fires with its full
    premise family.
    """
    check_vocabulary(voc)
    for f in s.left + s.right:
        for name in vocabulary(f):
            if name.startswith(RESERVED_PREFIX):
                raise InterpolationError("sequent contains reserved atoms")

    nodes: List[Optional[TNode]] = []

    def build(seq: Sequent, ancestors) -> int:
        nid = len(nodes)
        nodes.append(None)
        if not seq.is_set_sequent():
            contracted = seq.set_contraction()
            rule = Wk(
                tuple(x for x in _minus(seq.left, contracted.left)),
                tuple(x for x in _minus(seq.right, contracted.right)),
            )
            child = build(contracted, ancestors)
            nodes[nid] = TNode(seq, rule, (child,))
            return nid
        hit = ancestors.get(seq)
        rule = _instruction(seq)
        if hit is not None and not isinstance(rule, (Ax, BotL)):
            nodes[nid] = TNode(seq, Repeat(), (), hit)
            return nid
        ancestors2 = dict(ancestors)
        ancestors2[seq] = nid
        premises = rule.premises(seq)
        kids = tuple(build(prem, ancestors2) for prem in premises)
        nodes[nid] = TNode(seq, rule, kids)
        return nid

    build(s, {})
    return Template(nodes)


def _minus(a, b):
    from .sequents import mset_sub

    out = mset_sub(a, b)
    return out if out is not None else ()


# ---------------------------------------------------------------------------
# Template validation
# ---------------------------------------------------------------------------


def check_template(t: Template) -> None:
    """Validate the template conditions independently of the builder."""
    parent = t.parent_map()
    refs = [c for n in t.nodes for c in n.children]
    if len(refs) != len(set(refs)) or 0 in refs:
        raise TemplateCheckError(0, "malformed tree")
    reachable = set()
    stack = [0]
    while stack:
        nid = stack.pop()
        if nid in reachable:
            raise TemplateCheckError(nid, "malformed tree: cycle")
        reachable.add(nid)
        stack.extend(t.nodes[nid].children)
    if len(reachable) != len(t.nodes):
        raise TemplateCheckError(0, "malformed tree: unreachable nodes")

    def ancestors(nid):
        out = []
        while nid in parent:
            nid = parent[nid]
            out.append(nid)
        return out

    instantiation = {}
    for nid, n in enumerate(t.nodes):
        seq = n.sequent
        rule = n.rule
        # weakening condition
        if not seq.is_set_sequent():
            if not isinstance(rule, Wk):
                raise TemplateCheckError(nid, "weakening condition violated")
            want = seq.set_contraction()
            if len(n.children) != 1 or t.nodes[n.children[0]].sequent != want:
                raise TemplateCheckError(nid, "weakening must contract to the set-sequent")
            continue
        if isinstance(rule, Wk):
            raise TemplateCheckError(nid, "weakening applied to a set-sequent")
        # axiomatic termination
        axiomatic = Bot in seq.left or bool(seq.shared_atoms())
        if axiomatic:
            if not isinstance(rule, (Ax, BotL)) or n.children:
                raise TemplateCheckError(nid, "axiomatic set-sequent must be a leaf")
        # cyclic termination
        repeated_below = any(t.nodes[a].sequent == seq for a in ancestors(nid))
        if not axiomatic and repeated_below and not isinstance(rule, Repeat):
            raise TemplateCheckError(nid, "repeated set-sequent must be a Repeat")
        if isinstance(rule, Repeat):
            tgt = n.backlink
            if tgt is None or tgt not in ancestors(nid):
                raise TemplateCheckError(nid, "backlink must point to a strict ancestor")
            if t.nodes[tgt].sequent != seq:
                raise TemplateCheckError(nid, "backlink target sequent differs")
            continue
        if isinstance(rule, InterpStar):
            sigma = tuple(f for f in seq.left if f.is_interp())
            lam = tuple(f for f in seq.right if f.is_interp())
            if not _is_atoms_and_interps(seq.left) or not _is_atoms_and_interps(seq.right):
                raise TemplateCheckError(nid, "modal node sides must be atoms and |>-formulas")
            if rule.index != star_index(sigma, lam):
                raise TemplateCheckError(nid, "modal premise family is not the full enumeration")
        # local rule correctness
        try:
            premises = rule.premises(seq)
        except Exception as exc:
            raise TemplateCheckError(nid, f"rule error: {exc}")
        if len(premises) != len(n.children):
            raise TemplateCheckError(nid, "premise count mismatch")
        for want, cid in zip(premises, n.children):
            if t.nodes[cid].sequent != want:
                raise TemplateCheckError(nid, f"premise should be {want}")
        # determinism
        key = seq
        inst = (rule.name, rule)
        if key in instantiation and instantiation[key] != inst:
            raise TemplateCheckError(nid, "determinism violated")
        instantiation.setdefault(key, inst)


# ---------------------------------------------------------------------------
# Pre-interpolants
# ---------------------------------------------------------------------------


def bound_var(nid: int) -> str:
    return f"{RESERVED_PREFIX}{nid}"


def _sequences(sigma: Tuple[Formula, ...]):
    """Injective occurrence-sequences of a set of |>-formulas, all lengths,
    the empty sequence included."""
    values = sorted(set(sigma), key=lambda f: f.key)
    for length in range(0, len(values) + 1):
        yield from permutations(values, length)


def pre_interpolants(t: Template, voc) -> Dict[int, Formula]:
    """Bottom-up assignment of a pre-interpolant to every template node."""
    voc = check_vocabulary(voc)
    rho: Dict[int, Formula] = {}

    def premise_lookup(n: TNode):
        table = {}
        for (phis, psi), cid in zip(n.rule.index, n.children):
            table[(phis, psi)] = rho[cid]
        return table

    def go(nid: int) -> None:
        n = t.nodes[nid]
        for c in n.children:
            go(c)
        rule = n.rule
        if isinstance(rule, (Ax, BotL)):
            rho[nid] = Bot
        elif isinstance(rule, Empty):
            rho[nid] = Top
        elif isinstance(rule, Repeat):
            rho[nid] = Atom(bound_var(nid))
        elif isinstance(rule, (Wk, BotR, ImpR)):
            rho[nid] = rho[n.children[0]]
        elif isinstance(rule, ImpL):
            rho[nid] = _or(rho[n.children[0]], rho[n.children[1]])
        elif isinstance(rule, InterpStar):
            rho[nid] = _star_rho(n, premise_lookup(n), voc)
        else:
            raise InterpolationError(f"unexpected template rule {rule.name}")

    go(0)
    return rho


def _or(a, b):
    from .formulas import Or

    return Or(a, b)


def _star_rho(n: TNode, table, voc) -> Formula:
    seq = n.sequent
    sigma = tuple(f for f in seq.left if f.is_interp())
    lam = tuple(f for f in seq.right if f.is_interp())
    gamma = [f for f in seq.left if f.is_atom() and f.name in voc]
    delta = [f for f in seq.right if f.is_atom() and f.name in voc]

    conjuncts = []
    for seq_choice in _sequences(sigma):
        for target in [None] + list(lam):
            conjuncts.append(_rho_s(seq_choice, target, table))
    conjuncts.extend(gamma)
    conjuncts.extend(Neg(d) for d in delta)
    return big_and(conjuncts)


def _rho_s(choice, target, table) -> Formula:
    """Pre-interpolant clause for one pair of an ordering of the left
    |>-formulas and an optional principal from the right."""
    m = len(choice)
    ans_prefix = lambda i: mset(f.left for f in choice[:i])
    if target is None:
        body = big_or([table[(ans_prefix(i), choice[i].right)] for i in range(m)])
        return Interp(Neg(table[(ans_prefix(m), None)]), body)
    psi_m, phi = target.left, target.right
    disjuncts = []
    for i in range(m + 1):
        psi_i = psi_m if i == m else choice[i].right
        phis = mset(tuple(f.left for f in choice[:i]) + (phi,))
        disjuncts.append(
            Neg(Interp(table[(phis, psi_i)], Neg(table[(phis, None)])))
        )
    return big_or(disjuncts)


# ---------------------------------------------------------------------------
# Equational systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquationalSystem:
    bound: Tuple[str, ...]
    equations: Dict[str, Formula] = field(compare=False)
    free: frozenset = frozenset()

    def __post_init__(self):
        pass


def equations(t: Template, rho: Dict[int, Formula], voc=frozenset()) -> EquationalSystem:
    """One equation per Repeat node: its bound variable equals the
    companion's pre-interpolant."""
    eqs = {}
    bound = []
    for nid, n in enumerate(t.nodes):
        if isinstance(n.rule, Repeat):
            x = bound_var(nid)
            bound.append(x)
            eqs[x] = rho[n.backlink]
    return EquationalSystem(tuple(sorted(bound)), eqs, check_vocabulary(voc))


def order_equations(e: EquationalSystem) -> List[str]:
    """An enumeration of the bound variables witnessing orderability: each
    right side is modalized in every earlier (and its own) variable.  Found
    by topological sorting; every pair is re-checked explicitly."""
    remaining = set(e.bound)
    order: List[str] = []
    while remaining:
        pick = None
        for x in sorted(remaining):
            if all(modalized_in(e.equations[y], x) for y in remaining):
                pick = x
                break
        if pick is None:
            raise NotOrderable(f"no admissible next variable among {sorted(remaining)}")
        order.append(pick)
        remaining.remove(pick)
    for j, xj in enumerate(order):
        for i in range(j + 1):
            if not modalized_in(e.equations[xj], order[i]):
                raise NotOrderable(f"{xj} is not modalized in {order[i]}")
    return order


# ---------------------------------------------------------------------------
# Fixpoints and solving
# ---------------------------------------------------------------------------


def fixpoint(
    phi: Formula,
    var: str,
    limits: SearchLimits = DEFAULT_LIMITS,
    cap: Optional[int] = None,
) -> Formula:
    """A formula ``psi`` with ``psi <-> phi[var := psi]`` provable, found by
    validated iteration from the top element; every candidate is certified
    by the decision procedure before being returned."""
    if not modalized_in(phi, var):
        raise NotModalized(f"{var} must be modalized in {fmt(phi)}")
    if cap is None:
        cap = size(phi) + 1
    psi = simplify(substitute(phi, {var: Top}))
    for _ in range(cap):
        applied = simplify(substitute(phi, {var: psi}))
        if decide_il(Iff(psi, applied), limits):
            assert var not in vocabulary(psi)
            return psi
        psi = applied
    raise FixpointNotFound(
        f"no fixpoint of {fmt(phi)} in {var} within {cap} iterations"
    )


def solve(
    e: EquationalSystem,
    limits: SearchLimits = DEFAULT_LIMITS,
    cap: Optional[int] = None,
) -> Dict[str, Formula]:
    """Solve an orderable system by repeated fixpoints and back-substitution;
    each solution component is validated against its equation."""
    order = order_equations(e)
    chi: Dict[str, Formula] = {}
    for j, xj in enumerate(order):
        base = substitute(e.equations[xj], {x: chi[x] for x in order[:j]})
        psi_j = fixpoint(base, xj, limits, cap)
        for x in order[:j]:
            chi[x] = simplify(substitute(chi[x], {xj: psi_j}))
        chi[xj] = psi_j
    for x in e.bound:
        applied = substitute(e.equations[x], chi)
        if not decide_il(Iff(chi[x], applied), limits):
            raise InterpolationError(f"solution for {x} fails its equation")
        leftover = vocabulary(chi[x]) & set(e.bound)
        if leftover:
            raise InterpolationError(f"solution for {x} leaks bound variables")
    return chi


# ---------------------------------------------------------------------------
# Interpolants
# ---------------------------------------------------------------------------


def interpolant(
    phi: Formula,
    voc,
    limits: SearchLimits = DEFAULT_LIMITS,
    raw: bool = False,
) -> Formula:
    """The uniform interpolant of ``phi`` over the vocabulary: template of
    ``phi =>``, pre-interpolants, solved equations, root substitution."""
    voc = check_vocabulary(voc)
    t = build_template(Sequent((phi,), ()), voc)
    check_template(t)
    rho = pre_interpolants(t, voc)
    e = equations(t, rho, voc)
    sol = solve(e, limits)
    iota = substitute(rho[0], sol)
    if not raw:
        iota = simplify(iota)
    if not vocabulary(iota) <= voc:
        raise InterpolationError(
            f"interpolant vocabulary {sorted(vocabulary(iota))} escapes {sorted(voc)}"
        )
    return iota


@dataclass
class VerificationReport:
    vocab_ok: bool
    implication_ok: bool
    witnesses_checked: int
    failures: List[Formula] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.vocab_ok and self.implication_ok and not self.failures


def enumerate_formulas(voc, max_size: int) -> List[Formula]:
    """All formulas over the vocabulary up to the given size, smallest
    first; deterministic order."""
    names = sorted(voc)
    by_size: Dict[int, List[Formula]] = {}
    by_size[1] = [Bot] + [Atom(x) for x in names]
    for n in range(2, max_size + 1):
        acc = []
        for left_size in range(1, n - 1):
            right_size = n - 1 - left_size
            if right_size < 1:
                continue
            for a in by_size.get(left_size, ()):
                for b in by_size.get(right_size, ()):
                    acc.append(Imp(a, b))
                    acc.append(Interp(a, b))
        by_size[n] = acc
    out = []
    for n in range(1, max_size + 1):
        out.extend(by_size.get(n, ()))
    return out


def verify_interpolant(
    phi: Formula,
    voc,
    iota: Formula,
    witness_size_cap: int = 5,
    limits: SearchLimits = DEFAULT_LIMITS,
    logic: str = "il",
) -> VerificationReport:
    """Check the three interpolant clauses: vocabulary containment, the
    implication from ``phi``, and minimality against every witness formula
    over the vocabulary up to the size cap."""
    voc = check_vocabulary(voc)
    decide = decide_il if logic == "il" else decide_ilp
    report = VerificationReport(
        vocab_ok=vocabulary(iota) <= voc,
        implication_ok=decide(Imp(phi, iota), limits),
        witnesses_checked=0,
    )
    for psi in enumerate_formulas(voc, witness_size_cap):
        if decide(Imp(phi, psi), limits):
            report.witnesses_checked += 1
            if not decide(Imp(iota, psi), limits):
                report.failures.append(psi)
    return report


def ilp_interpolant(
    phi: Formula, voc, limits: SearchLimits = DEFAULT_LIMITS, raw: bool = False
) -> Formula:
    """Uniform interpolant for the persistence logic: interpolate the
    translation."""
    return interpolant(sharp(phi), voc, limits, raw)


# ---------------------------------------------------------------------------
# Conservative simplification
# ---------------------------------------------------------------------------


def _match_and(f):
    from .formulas import match_and

    return match_and(f)


def _match_or(f):
    from .formulas import match_or

    return match_or(f)


def _match_neg(f):
    from .formulas import match_neg

    return match_neg(f)


def simplify(f: Formula) -> Formula:
    """Equivalence-preserving propositional clean-up: constant absorption,
    double negation, idempotence.  Modal structure is never rewritten."""
    cache: Dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        hit = cache.get(g)
        if hit is not None:
            return hit
        out = _simplify_node(g, go)
        cache[g] = out
        return out

    return go(f)


def _simplify_node(g: Formula, go) -> Formula:
    from .formulas import And, Or

    if g.kind in ("atom", "bot"):
        return g
    if g.kind == "interp":
        # No rewriting under the modality without a provability argument.
        return g
    both = _match_and(g)
    if both is not None:
        a, b = go(both[0]), go(both[1])
        if a == Top:
            return b
        if b == Top:
            return a
        if a == Bot or b == Bot:
            return Bot
        if a == b:
            return a
        return And(a, b)
    either = _match_or(g)
    if either is not None:
        a, b = go(either[0]), go(either[1])
        if a == Bot:
            return b
        if b == Bot:
            return a
        if a == Top or b == Top:
            return Top
        if a == b:
            return a
        return Or(a, b)
    neg = _match_neg(g)
    if neg is not None:
        inner = go(neg)
        if inner == Top:
            return Bot
        if inner == Bot:
            return Top
        inner_neg = _match_neg(inner)
        if inner_neg is not None:
            return inner_neg
        return Neg(inner)
    a, b = go(g.left), go(g.right)
    if a == Bot:
        return Top
    if b == Top:
        return Top
    if a == Top:
        return b
    if a == b:
        return Top
    return Imp(a, b)
