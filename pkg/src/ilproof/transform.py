"""Executable proof transformations.

Height-preserving weakening, inversion of the invertible rules, contraction,
the admissible necessitation and Löb rules, both directions of the Hilbert
bridge, the fuel-bounded translation from the wellfounded to the
non-wellfounded calculus, the translation of cyclic proofs back into
wellfounded ones, the slimming step for modal orderings, one local cut
reduction step, and cut elimination by cut-free reproof.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional

from .formulas import Atom, Bot, Formula, Imp, Interp, big_and, big_or
from .golden import fgil_axiom_proof
from .hilbert import (
    AxiomJust,
    HilbertProof,
    MP,
    Nec,
    ProofBuilder,
    Taut,
    _bnec_fix,
    _lob_rule,
    check_hilbert,
    lob_rule_shape,
)
from .proofs import (
    CheckError,
    CyclicProof,
    Proof,
    assumption,
    ax_proof,
    check_cyclic,
    check_proof,
    main_fragment,
    node,
)
from .rules import (
    Assumption,
    Ax,
    BotL,
    BotR,
    Ctr,
    Cut,
    Equiv,
    ImpL,
    ImpR,
    InterpIK4,
    InterpIK4Slim,
    InterpIL,
    Repeat,
    Wk,
)
from .sequents import (
    Sequent,
    interp_bot,
    mset,
    mset_add,
    mset_diff,
    mset_inter,
    mset_sub,
    sub_sequent,
    to_formula,
)
from .rules import CalculusId


class ShapeMismatch(Exception):
    pass


class PrincipalMissing(Exception):
    pass


class DuplicateMissing(Exception):
    pass


class NoDuplicate(Exception):
    pass


class NotLocallyCutFree(Exception):
    pass


class InternalError(Exception):
    """An invariant the theory guarantees failed; always a bug, never input."""


_MODAL = (InterpIL, InterpIK4, InterpIK4Slim)
_CONTEXT_RULES = (BotR, ImpL, ImpR, Cut, Ctr, Equiv)


# ---------------------------------------------------------------------------
# Weakening
# ---------------------------------------------------------------------------


def weaken(p: Proof, add_left=(), add_right=()) -> Proof:
    """Height-preserving admissible weakening: additions are absorbed by
    leaves and by the weakening part of modal rules."""
    add_left, add_right = tuple(add_left), tuple(add_right)
    if not add_left and not add_right:
        return p
    new_seq = p.sequent.add(add_left, add_right)
    rule = p.rule
    if isinstance(rule, (Ax, BotL, Assumption)):
        return Proof(new_seq, rule)
    if isinstance(rule, _MODAL):
        new_rule = replace(
            rule,
            weak_left=mset_add(rule.weak_left, add_left),
            weak_right=mset_add(rule.weak_right, add_right),
        )
        return Proof(new_seq, new_rule, p.children)
    if isinstance(rule, Wk):
        new_rule = Wk(mset_add(rule.add_left, add_left), mset_add(rule.add_right, add_right))
        return Proof(new_seq, new_rule, p.children)
    if isinstance(rule, _CONTEXT_RULES):
        kids = tuple(weaken(c, add_left, add_right) for c in p.children)
        return Proof(new_seq, rule, kids)
    raise ShapeMismatch(f"cannot weaken through rule {rule.name}")


def weaken_to(p: Proof, target: Sequent) -> Proof:
    add_left = mset_sub(target.left, p.sequent.left)
    add_right = mset_sub(target.right, p.sequent.right)
    if add_left is None or add_right is None:
        raise ShapeMismatch(f"{p.sequent} does not weaken to {target}")
    return weaken(p, add_left, add_right)


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------


def invert(p: Proof, which: str, principal: Optional[Formula] = None) -> Proof:
    """Invert one of the invertible rules against an occurrence of
    ``principal``; returns the proof of the corresponding premise."""
    if which == "BotR":
        return _invert(p, "BotR", Bot)
    if principal is None or not principal.is_imp():
        raise PrincipalMissing(f"{which} needs an implication principal")
    if which not in ("ImpL0", "ImpL1", "ImpR"):
        raise ShapeMismatch(f"unknown inversion {which!r}")
    return _invert(p, which, principal)


def _inverted_sequent(seq: Sequent, which: str, a: Formula) -> Sequent:
    if which == "BotR":
        return seq.remove(right=(Bot,))
    if which == "ImpR":
        return seq.remove(right=(a,)).add(left=(a.left,), right=(a.right,))
    if which == "ImpL0":
        return seq.remove(left=(a,)).add(right=(a.left,))
    return seq.remove(left=(a,)).add(left=(a.right,))


def _invert(p: Proof, which: str, a: Formula) -> Proof:
    seq = p.sequent
    on_right = which in ("BotR", "ImpR")
    present = a in (seq.right if on_right else seq.left)
    if not present:
        raise PrincipalMissing(f"{a} not on the {'right' if on_right else 'left'} of {seq}")
    target = _inverted_sequent(seq, which, a)
    rule = p.rule

    if isinstance(rule, (Ax, BotL, Assumption)):
        # The inverted occurrence is never an atom or a left F, so the leaf
        # stays closed.
        return Proof(target, rule)
    if which == "BotR" and isinstance(rule, BotR):
        return p.children[0]
    if which == "ImpR" and isinstance(rule, ImpR) and Imp(rule.phi, rule.psi) == a:
        return p.children[0]
    if which in ("ImpL0", "ImpL1") and isinstance(rule, ImpL) and Imp(rule.phi, rule.psi) == a:
        return p.children[0] if which == "ImpL0" else p.children[1]
    if isinstance(rule, _MODAL):
        if on_right:
            if a not in rule.weak_right:
                raise PrincipalMissing(f"{a} is not in the weakening part")
            weak_right = mset_sub(rule.weak_right, (a,))
            weak_left = rule.weak_left
        else:
            if a not in rule.weak_left:
                raise PrincipalMissing(f"{a} is not in the weakening part")
            weak_left = mset_sub(rule.weak_left, (a,))
            weak_right = rule.weak_right
        if which == "ImpR":
            weak_left = mset_add(weak_left, (a.left,))
            weak_right = mset_add(weak_right, (a.right,))
        elif which == "ImpL0":
            weak_right = mset_add(weak_right, (a.left,))
        elif which == "ImpL1":
            weak_left = mset_add(weak_left, (a.right,))
        new_rule = replace(rule, weak_left=weak_left, weak_right=weak_right)
        return Proof(target, new_rule, p.children)
    if isinstance(rule, Wk):
        adds = rule.add_right if on_right else rule.add_left
        if a in adds:
            if which == "BotR":
                new_rule = Wk(rule.add_left, mset_sub(rule.add_right, (a,)))
            elif which == "ImpR":
                new_rule = Wk(
                    mset_add(rule.add_left, (a.left,)),
                    mset_add(mset_sub(rule.add_right, (a,)), (a.right,)),
                )
            elif which == "ImpL0":
                new_rule = Wk(
                    mset_sub(rule.add_left, (a,)),
                    mset_add(rule.add_right, (a.left,)),
                )
            else:
                new_rule = Wk(
                    mset_add(mset_sub(rule.add_left, (a,)), (a.right,)),
                    rule.add_right,
                )
            return Proof(target, new_rule, p.children)
        return Proof(target, rule, tuple(_invert(c, which, a) for c in p.children))
    if isinstance(rule, Equiv):
        swapped = rule.conclusion_formula == a and (
            (rule.side == "right") == on_right
        )
        if swapped:
            raise ShapeMismatch("cannot invert through an Equiv principal")
        return Proof(target, rule, tuple(_invert(c, which, a) for c in p.children))
    if isinstance(rule, (BotR, ImpL, ImpR, Cut, Ctr)):
        return Proof(target, rule, tuple(_invert(c, which, a) for c in p.children))
    raise ShapeMismatch(f"cannot invert through rule {rule.name}")


# ---------------------------------------------------------------------------
# Contraction
# ---------------------------------------------------------------------------


def contract(p: Proof, dup_left=(), dup_right=()) -> Proof:
    """Eliminate duplicates: the conclusion loses one occurrence of every
    listed formula; modal orderings are re-ordered as needed."""
    out = p
    for f in dup_left:
        out = _contract1(out, f, "left")
    for f in dup_right:
        out = _contract1(out, f, "right")
    return out


def _count(side, f):
    return sum(1 for g in side if g == f)


def _contract1(p: Proof, f: Formula, side: str) -> Proof:
    seq = p.sequent
    on_left = side == "left"
    if _count(seq.left if on_left else seq.right, f) < 2:
        raise DuplicateMissing(f"{f} does not occur twice on the {side} of {seq}")
    target = seq.remove(left=(f,)) if on_left else seq.remove(right=(f,))
    rule = p.rule

    if isinstance(rule, (Ax, BotL, Assumption)):
        return Proof(target, rule)
    if isinstance(rule, BotR):
        if not on_left and f == Bot:
            return p.children[0]
        return Proof(target, rule, (_contract1(p.children[0], f, side),))
    if isinstance(rule, ImpR):
        a = Imp(rule.phi, rule.psi)
        if not on_left and f == a:
            child = p.children[0]
            inv = _invert(child, "ImpR", a)
            inv = _contract1(inv, rule.phi, "left")
            inv = _contract1(inv, rule.psi, "right")
            return Proof(target, rule, (inv,))
        return Proof(target, rule, (_contract1(p.children[0], f, side),))
    if isinstance(rule, ImpL):
        a = Imp(rule.phi, rule.psi)
        if on_left and f == a:
            c0, c1 = p.children
            d0 = _contract1(_invert(c0, "ImpL0", a), rule.phi, "right")
            d1 = _contract1(_invert(c1, "ImpL1", a), rule.psi, "left")
            return Proof(target, rule, (d0, d1))
        kids = tuple(_contract1(c, f, side) for c in p.children)
        return Proof(target, rule, kids)
    if isinstance(rule, Equiv):
        if rule.conclusion_formula == f and (rule.side == "left") == on_left:
            raise ShapeMismatch("cannot contract through an Equiv principal")
        return Proof(target, rule, tuple(_contract1(c, f, side) for c in p.children))
    if isinstance(rule, (Cut, Ctr)):
        kids = tuple(_contract1(c, f, side) for c in p.children)
        return Proof(target, rule, kids)
    if isinstance(rule, Wk):
        adds = rule.add_left if on_left else rule.add_right
        if f in adds:
            if on_left:
                new_rule = Wk(mset_sub(rule.add_left, (f,)), rule.add_right)
            else:
                new_rule = Wk(rule.add_left, mset_sub(rule.add_right, (f,)))
            return Proof(target, new_rule, p.children)
        kids = tuple(_contract1(c, f, side) for c in p.children)
        return Proof(target, rule, kids)
    if isinstance(rule, _MODAL):
        if not on_left:
            if f not in rule.weak_right:
                raise DuplicateMissing(f"{f} is not duplicated outside the principal")
            new_rule = replace(rule, weak_right=mset_sub(rule.weak_right, (f,)))
            return Proof(target, new_rule, p.children)
        if f in rule.weak_left:
            new_rule = replace(rule, weak_left=mset_sub(rule.weak_left, (f,)))
            return Proof(target, new_rule, p.children)
        # Both occurrences sit in the ordering: drop the later one and
        # contract its antecedent inside the premises above it.
        positions = [
            i for i, (a, b) in enumerate(rule.ordering) if Interp(a, b) == f
        ]
        if len(positions) < 2:
            raise DuplicateMissing(f"{f} does not occur twice in the ordering")
        j, k = positions[0], positions[1]
        return _drop_ordering_index(p, j, k, target)
    raise ShapeMismatch(f"cannot contract through rule {rule.name}")


def _drop_ordering_index(p: Proof, j: int, k: int, target: Sequent) -> Proof:
    """Remove ordering position ``k`` whose antecedent already occurs at
    ``j`` < ``k``; premises above ``k`` contract the duplicate."""
    rule = p.rule
    m = len(rule.ordering)
    phi_k = rule.ordering[k][0]
    new_ordering = rule.ordering[:k] + rule.ordering[k + 1 :]
    new_rule = replace(rule, ordering=new_ordering)
    kids = []
    for idx, child in enumerate(p.children):
        i = m - idx
        if i == k:
            continue
        if i > k:
            child = _contract1(child, Interp(phi_k, Bot), "left")
            child = _contract1(child, phi_k, "right")
        kids.append(child)
    out = Proof(target, new_rule, tuple(kids))
    return out


# ---------------------------------------------------------------------------
# Necessitation and Löb
# ---------------------------------------------------------------------------


def nec_admissible(
    p: Proof,
    gamma=(),
    delta=(),
    target: CalculusId = CalculusId.FGIL,
) -> Proof:
    """From ``phi, Sigma|>F => Sigma`` build ``Sigma|>F, G => phi|>F, D``:
    weaken the input into the principal premise and close the others by
    BotL."""
    sigma = p.sequent.right
    boxes = interp_bot(sigma)
    rest = mset_sub(p.sequent.left, boxes)
    if rest is None or len(rest) != 1:
        raise ShapeMismatch(f"conclusion {p.sequent} is not of the form phi, S|>F => S")
    phi = rest[0]
    ordering = tuple((s, Bot) for s in sigma)
    principal = (phi, Bot)
    if target in (CalculusId.FGIL, CalculusId.FGIL_CUT):
        rule = InterpIL(ordering, principal, mset(gamma), mset(delta))
    else:
        rule = InterpIK4(ordering, principal, mset(gamma), mset(delta))
    conclusion = rule.conclusion()
    premises = rule.premises(conclusion)
    main = weaken_to(p, premises[0])
    kids = [main]
    for prem in premises[1:]:
        if Bot not in prem.left:
            raise InternalError("necessitation side premise must close by BotL")
        kids.append(node(prem, BotL()))
    return Proof(conclusion, rule, tuple(kids))


def lob(p: Proof, psi: Optional[Formula] = None, sigma=None) -> Proof:
    """From ``psi, (psi, Sigma)|>F => Sigma`` build ``psi, Sigma|>F => Sigma``
    by cutting against a diagonal modal instance.  The decomposition is
    inferred when not supplied."""
    if sigma is None:
        sigma = p.sequent.right
    sigma = mset(sigma)
    if mset(p.sequent.right) != sigma:
        raise ShapeMismatch("sigma does not match the succedent")
    rest = mset_sub(p.sequent.left, interp_bot(sigma))
    if rest is None:
        raise ShapeMismatch("antecedent lacks the boxed succedents")
    if psi is None:
        for cand in set(rest):
            if mset((cand, Interp(cand, Bot))) == rest:
                psi = cand
                break
        if psi is None:
            raise ShapeMismatch("no Löb decomposition of the antecedent")
    if mset((psi, Interp(psi, Bot))) != rest:
        raise ShapeMismatch("antecedent is not psi, (psi, Sigma)|>F")

    rule = InterpIL(
        tuple((s, Bot) for s in sigma), (psi, Bot), (psi,), sigma
    )
    conclusion = rule.conclusion()
    premises = rule.premises(conclusion)
    main = weaken_to(p, premises[0])
    kids = [main]
    for prem in premises[1:]:
        if Bot not in prem.left:
            raise InternalError("Löb side premise must close by BotL")
        kids.append(node(prem, BotL()))
    il_part = Proof(conclusion, rule, tuple(kids))
    goal = Sequent((psi,) + interp_bot(sigma), sigma)
    return Proof(goal, Cut(Interp(psi, Bot)), (il_part, p))


# ---------------------------------------------------------------------------
# Hilbert bridge
# ---------------------------------------------------------------------------


def prove_cut_free(seq: Sequent) -> Proof:
    """Search the sequent and translate the cyclic proof to fgil; raises
    InternalError when the search fails (callers use it on sequents the
    theory guarantees provable)."""
    from . import search as search_mod

    outcome = search_mod.prove(seq)
    if isinstance(outcome, search_mod.ResourceExhausted):
        raise search_mod.ResourceError(f"search exhausted reproving {seq}")
    if not isinstance(outcome, search_mod.Provable):
        raise InternalError(f"expected {seq} to be provable, search said no")
    return cyclic_to_fgil(outcome.proof, frozenset())


def prove_taut(seq: Sequent, calculus: CalculusId = CalculusId.FGIL) -> Proof:
    """Cut-free proof of a sequent whose propositional skeleton is valid:
    invertible rules only, closing leaves by the axiom expansion.  Raises
    InternalError when a saturated leaf shows the skeleton invalid."""
    left, right = seq.left, seq.right
    if Bot in left:
        return node(seq, BotL())
    shared = seq.shared_atoms()
    if shared:
        return node(seq, Ax(shared[0].name))
    for f in left:
        if f in right:
            rest = seq.remove(left=(f,), right=(f,))
            return ax_proof(f, rest.left, rest.right, calculus)
    if Bot in right:
        return Proof(seq, BotR(), (prove_taut(seq.remove(right=(Bot,)), calculus),))
    for f in right:
        if f.is_imp():
            rule = ImpR(f.left, f.right)
            return Proof(seq, rule, (prove_taut(rule.premises(seq)[0], calculus),))
    for f in left:
        if f.is_imp():
            rule = ImpL(f.left, f.right)
            prems = rule.premises(seq)
            return Proof(seq, rule, tuple(prove_taut(x, calculus) for x in prems))
    raise InternalError(f"{seq} has an invalid propositional skeleton")


def hilbert_to_sequent(h: HilbertProof) -> Proof:
    """Translate a Hilbert proof into a wellfounded sequent proof (with cut)
    of ``=> theorem``."""
    check_hilbert(h, "il")
    proofs = []
    for line in h.lines:
        just = line.just
        if isinstance(just, Taut):
            pf = prove_taut(Sequent((), (line.formula,)))
        elif isinstance(just, AxiomJust):
            pf = fgil_axiom_proof(just.scheme, just.args)
        elif isinstance(just, MP):
            imp_line = h.lines[just.imp].formula
            inv = invert(proofs[just.imp], "ImpR", imp_line)
            wk = weaken(proofs[just.arg], (), (line.formula,))
            pf = Proof(
                Sequent((), (line.formula,)),
                Cut(imp_line.left),
                (wk, inv),
            )
        elif isinstance(just, Nec):
            src = h.lines[just.source].formula
            neg_src = Imp(src, Bot)
            refute = Proof(
                Sequent((neg_src,), ()),
                ImpL(src, Bot),
                (proofs[just.source], node(Sequent((Bot,), ()), BotL())),
            )
            pf = nec_admissible(refute, (), (), CalculusId.FGIL_CUT)
        else:
            raise ShapeMismatch(f"unknown justification {just!r}")
        proofs.append(pf)
    return proofs[-1]


def sequent_to_hilbert(p: Proof) -> HilbertProof:
    """Translate a wellfounded proof (with cut) into a Hilbert proof of the
    formula interpretation of its conclusion."""
    check_proof(p, CalculusId.FGIL_CUT)
    b = ProofBuilder()
    idx = _s2h(p, b)
    return b.conclude(idx)


def _s2h(p: Proof, b: ProofBuilder) -> int:
    goal = to_formula(p.sequent)
    rule = p.rule
    if isinstance(rule, (Ax, BotL)):
        return b.taut(goal)
    if isinstance(rule, (BotR, ImpL, ImpR, Cut)):
        kid_idxs = [_s2h(c, b) for c in p.children]
        return b.derive(goal, *kid_idxs)
    if isinstance(rule, InterpIL):
        return _s2h_modal(p, b, goal)
    raise ShapeMismatch(f"rule {rule.name} has no Hilbert translation")


def _s2h_modal(p: Proof, b: ProofBuilder, goal: Formula) -> int:
    rule = p.rule
    m = len(rule.ordering)
    psi_m, phi = rule.principal
    hypothesis = big_and([Interp(a, c) for a, c in rule.ordering])
    conditional = {}  # i -> index of proof of hypothesis -> (psi_i |> phi)

    for i in range(0, m + 1):
        psi_i = psi_m if i == m else rule.ordering[i][1]
        sigma = [a for a, _ in rule.ordering[:i]] + [phi]
        kid_idx = _s2h(p.children[m - i], b)
        hyp_idx = b.derive(lob_rule_shape(BnecF_(psi_i), sigma), kid_idx)
        lob_idx = _lob_rule(b, hyp_idx, BnecF_(psi_i), sigma)
        bfix = _bnec_fix(b, psi_i)
        step = b.chain(bfix, lob_idx)  # psi_i |> \/sigma

        # Under the hypothesis: (\/sigma) |> phi by folding J3 over J2 links.
        refl = b.interp_of_taut(phi, phi)
        cond_cur = b.derive(Imp(hypothesis, Interp(phi, phi)), refl)
        acc = phi
        for kk in range(i - 1, -1, -1):
            phi_k, psi_k = rule.ordering[kk]
            elem = b.taut(Imp(hypothesis, Interp(phi_k, psi_k)))
            j2 = b.axiom("J2", phi_k, psi_k, phi)
            cond_k = b.derive(
                Imp(hypothesis, Interp(phi_k, phi)), j2, elem, conditional[kk]
            )
            j3 = b.axiom("J3", phi_k, phi, acc)
            acc = Or_(phi_k, acc)
            cond_cur = b.derive(Imp(hypothesis, Interp(acc, phi)), j3, cond_k, cond_cur)
        assert acc == big_or(sigma)
        j2_final = b.axiom("J2", psi_i, acc, phi)
        conditional[i] = b.derive(
            Imp(hypothesis, Interp(psi_i, phi)), j2_final, step, cond_cur
        )
    return b.derive(goal, conditional[m])


def BnecF_(x):
    from .formulas import BnecF

    return BnecF(x)


def Or_(a, c):
    from .formulas import Or

    return Or(a, c)


# ---------------------------------------------------------------------------
# Wellfounded -> non-wellfounded prefix
# ---------------------------------------------------------------------------


def alpha_prefix(p: Proof, fuel: int) -> Proof:
    """Fuel-bounded prefix of the corecursive translation into the
    non-wellfounded calculus: every diagonal modal node becomes a
    diagonal-free one over Löb-lifted premises, consuming one unit of fuel;
    exhausted nodes become assumptions."""
    rule = p.rule
    if isinstance(rule, InterpIL):
        if fuel <= 0:
            return assumption(p.sequent)
        m = len(rule.ordering)
        psi_m, phi = rule.principal
        kids = []
        for idx, child in enumerate(p.children):
            i = m - idx
            psi_i = psi_m if i == m else rule.ordering[i][1]
            sigma = mset([a for a, _ in rule.ordering[:i]] + [phi])
            lifted = lob(child, psi=psi_i, sigma=sigma)
            kids.append(alpha_prefix(lifted, fuel - 1))
        new_rule = InterpIK4(rule.ordering, rule.principal, rule.weak_left, rule.weak_right)
        return Proof(p.sequent, new_rule, tuple(kids))
    if isinstance(rule, Assumption):
        return p
    return Proof(p.sequent, rule, tuple(alpha_prefix(c, fuel) for c in p.children))


# ---------------------------------------------------------------------------
# Cyclic -> wellfounded
# ---------------------------------------------------------------------------


def cyclic_to_fgil(p: CyclicProof, lam: Iterable[Formula] = frozenset()) -> Proof:
    """Translate a cyclic proof of ``G => D`` into a wellfounded cut-free
    proof of ``lam|>F, G => D``; with empty ``lam`` the conclusion is kept.

    Backlinks are unfolded on demand; each modal step either closes a premise
    by the axiom expansion (antecedent already in ``lam``) or recurses with a
    strictly larger ``lam``, so the unfolding terminates.
    """
    check_cyclic_any(p)
    lam = frozenset(lam)
    root_measure = None

    def go(nid: int, lam: frozenset, blocked: frozenset) -> Proof:
        n = p.nodes[nid]
        while isinstance(n.rule, Repeat):
            tgt = n.backlink
            if tgt in blocked:
                raise InternalError("progress-free cycle during unfolding")
            blocked = blocked | {tgt}
            nid = tgt
            n = p.nodes[nid]
        rule = n.rule
        lam_list = mset(lam)
        lam_boxes = interp_bot(lam_list)
        new_seq = n.sequent.add(left=lam_boxes)
        if isinstance(rule, (Ax, BotL)):
            return Proof(new_seq, rule)
        if isinstance(rule, (BotR, ImpL, ImpR)):
            kids = tuple(go(c, lam, blocked) for c in n.children)
            return Proof(new_seq, rule, kids)
        if isinstance(rule, (InterpIK4, InterpIK4Slim)):
            m = len(rule.ordering)
            nlam = len(lam_list)
            psi_m, phi = rule.principal
            new_ordering = tuple((x, Bot) for x in lam_list) + rule.ordering
            new_rule = InterpIL(
                new_ordering, rule.principal, rule.weak_left, rule.weak_right
            )
            conclusion = new_rule.conclusion()
            if conclusion != new_seq:
                raise InternalError("translated conclusion mismatch")
            premises = new_rule.premises(conclusion)
            kids = []
            measure_here = len(sub_sequent(n.sequent) - lam)
            for idx, prem in enumerate(premises):
                pos = (nlam + m) - idx
                if pos < nlam:
                    if Bot not in prem.left:
                        raise InternalError("lambda premise must close by BotL")
                    kids.append(node(prem, BotL()))
                    continue
                i_old = pos - nlam
                child_nid = n.children[m - i_old]
                psi_i = psi_m if i_old == m else rule.ordering[i_old][1]
                if psi_i in lam:
                    rest = prem.remove(left=(psi_i,), right=(psi_i,))
                    kids.append(ax_proof(psi_i, rest.left, rest.right, CalculusId.FGIL))
                else:
                    lam2 = lam | {psi_i}
                    child_seq = p.nodes[child_nid].sequent
                    measure_there = len(sub_sequent(child_seq) - lam2)
                    if measure_there >= measure_here:
                        raise InternalError("unfolding measure failed to decrease")
                    sub = go(child_nid, lam2, frozenset())
                    kids.append(weaken_to(sub, prem))
            return Proof(conclusion, new_rule, tuple(kids))
        raise ShapeMismatch(f"rule {rule.name} not part of the cyclic calculus")

    return go(0, lam, frozenset())


def check_cyclic_any(p: CyclicProof) -> None:
    """Accept cyclic proofs in the slim or full diagonal-free calculus."""
    try:
        check_cyclic(p, CalculusId.GIL_SLIM)
    except CheckError:
        check_cyclic(p, CalculusId.GIL)


# ---------------------------------------------------------------------------
# Slimming
# ---------------------------------------------------------------------------


def slim_step(rule, premises):
    """One step towards a slim ordering: drop a duplicated antecedent from a
    diagonal-free modal instance, contracting inside the affected premises.
    The dropped ordering formula moves to the weakening part, so the
    conclusion is unchanged.  Returns the new rule and premise proofs."""
    if not isinstance(rule, (InterpIK4, InterpIK4Slim)):
        raise ShapeMismatch("slim_step applies to diagonal-free modal rules")
    ans = [a for a, _ in rule.ordering]
    dup = None
    for k in range(len(ans)):
        for j in range(k):
            if ans[j] == ans[k]:
                dup = (j, k)
                break
        if dup:
            break
    if dup is None:
        raise NoDuplicate("ordering antecedents are pairwise distinct")
    j, k = dup
    m = len(rule.ordering)
    phi_k = ans[k]
    dropped = Interp(*rule.ordering[k])
    new_rule = InterpIK4(
        rule.ordering[:k] + rule.ordering[k + 1 :],
        rule.principal,
        mset_add(rule.weak_left, (dropped,)),
        rule.weak_right,
    )
    new_premises = []
    for idx, child in enumerate(premises):
        i = m - idx
        if i == k:
            continue
        if i > k:
            child = contract(child, (Interp(phi_k, Bot),), (phi_k,))
        new_premises.append(child)
    return new_rule, new_premises


# ---------------------------------------------------------------------------
# Local cut reduction
# ---------------------------------------------------------------------------


def _fragment_has_cut(p: Proof) -> bool:
    fragment, _ = main_fragment(p)
    return fragment.uses_rule(Cut)


def cut_reduce_step(pi: Proof, tau: Proof, chi: Formula) -> Proof:
    """One local cut-admissibility step: from locally cut-free proofs of
    ``G => D, chi`` and ``chi, G => D`` build a locally cut-free proof of
    ``G => D``; new cuts land above the next modal premises."""
    if chi not in pi.sequent.right:
        raise ShapeMismatch("first premise must carry the cut formula on the right")
    gd = pi.sequent.remove(right=(chi,))
    if tau.sequent != gd.add(left=(chi,)):
        raise ShapeMismatch("cut premise sequents do not match")
    if _fragment_has_cut(pi) or _fragment_has_cut(tau):
        raise NotLocallyCutFree("inputs must be locally cut-free")
    return _reduce(pi, tau, chi)


def _reduce(pi: Proof, tau: Proof, chi: Formula) -> Proof:
    gd = pi.sequent.remove(right=(chi,))

    # Conclusion already axiomatic.
    if Bot in gd.left:
        return node(gd, BotL())
    shared = gd.shared_atoms()
    if shared:
        return node(gd, Ax(shared[0].name))

    if pi.is_assumption() or tau.is_assumption():
        return assumption(gd)

    # Axiomatic premises.
    if isinstance(pi.rule, BotL):
        raise InternalError("F on the left implies an axiomatic conclusion")
    if isinstance(pi.rule, Ax):
        # the shared atom must be the cut formula, sitting in G
        return contract(tau, dup_left=(chi,))
    if isinstance(tau.rule, BotL):
        return invert(pi, "BotR")
    if isinstance(tau.rule, Ax):
        return contract(pi, dup_right=(chi,))

    # BotR on either side.
    if isinstance(pi.rule, BotR):
        if chi == Bot:
            return pi.children[0]
        tau2 = invert(tau, "BotR")
        red = _reduce(pi.children[0], tau2, chi)
        return Proof(gd, BotR(), (red,))
    if isinstance(tau.rule, BotR):
        pi2 = invert(pi, "BotR")
        red = _reduce(pi2, tau.children[0], chi)
        return Proof(gd, BotR(), (red,))

    # The cut formula sits in a modal weakening part: drop it.
    if isinstance(pi.rule, _MODAL) and chi in pi.rule.weak_right:
        new_rule = replace(pi.rule, weak_right=mset_sub(pi.rule.weak_right, (chi,)))
        return Proof(gd, new_rule, pi.children)
    if isinstance(tau.rule, _MODAL) and chi in tau.rule.weak_left:
        new_rule = replace(tau.rule, weak_left=mset_sub(tau.rule.weak_left, (chi,)))
        return Proof(gd, new_rule, tau.children)

    pi_principal = isinstance(pi.rule, ImpR) and Imp(pi.rule.phi, pi.rule.psi) == chi
    tau_principal = isinstance(tau.rule, ImpL) and Imp(tau.rule.phi, tau.rule.psi) == chi

    # Principal cut on an implication.
    if pi_principal and tau_principal:
        chi0, chi1 = chi.left, chi.right
        pi0 = pi.children[0]
        tau0, tau1 = tau.children
        tau0w = weaken(tau0, (), (chi1,))
        rho0 = _reduce(tau0w, pi0, chi0)
        return _reduce(rho0, tau1, chi1)

    # Commute through a propositional rule that does not touch the cut.
    if isinstance(pi.rule, ImpL):
        a = Imp(pi.rule.phi, pi.rule.psi)
        tau0 = invert(tau, "ImpL0", a)
        tau1 = invert(tau, "ImpL1", a)
        r0 = _reduce(pi.children[0], tau0, chi)
        r1 = _reduce(pi.children[1], tau1, chi)
        return Proof(gd, pi.rule, (r0, r1))
    if isinstance(pi.rule, ImpR) and not pi_principal:
        a = Imp(pi.rule.phi, pi.rule.psi)
        tau2 = invert(tau, "ImpR", a)
        red = _reduce(pi.children[0], tau2, chi)
        return Proof(gd, pi.rule, (red,))
    if isinstance(tau.rule, ImpL) and not tau_principal:
        a = Imp(tau.rule.phi, tau.rule.psi)
        pi0 = invert(pi, "ImpL0", a)
        pi1 = invert(pi, "ImpL1", a)
        r0 = _reduce(pi0, tau.children[0], chi)
        r1 = _reduce(pi1, tau.children[1], chi)
        return Proof(gd, tau.rule, (r0, r1))
    if isinstance(tau.rule, ImpR):
        a = Imp(tau.rule.phi, tau.rule.psi)
        pi2 = invert(pi, "ImpR", a)
        red = _reduce(pi2, tau.children[0], chi)
        return Proof(gd, tau.rule, (red,))
    if pi_principal and isinstance(tau.rule, _MODAL):
        raise InternalError("an implication cut formula cannot enter a modal ordering")

    # Modal clash: chi is principal in pi and part of tau's ordering.
    if isinstance(pi.rule, _MODAL) and isinstance(tau.rule, _MODAL):
        return _reduce_modal(pi, tau, chi, gd)
    raise InternalError(f"unhandled cut configuration: {pi.rule.name} / {tau.rule.name}")


def _modal_premise_proof(p: Proof, i: int) -> Proof:
    m = len(p.rule.ordering)
    return p.children[m - i]


def _reduce_modal(pi: Proof, tau: Proof, chi: Formula, gd: Sequent) -> Proof:
    rp, rt = pi.rule, tau.rule
    if Interp(*rp.principal) != chi:
        raise InternalError("cut formula must be principal in the first premise")
    ks = [i for i, (a, b) in enumerate(rt.ordering) if Interp(a, b) == chi]
    if not ks:
        raise InternalError("cut formula missing from the second premise ordering")
    k = ks[0]
    chi0, chi1 = chi.left, chi.right
    m = len(rp.ordering)
    n = len(rt.ordering)

    pi_m = _modal_premise_proof(pi, m)
    tau_k = _modal_premise_proof(tau, k)
    pi_m_nec = nec_admissible(pi_m, (), (), CalculusId.GIL_CUT)
    tau_k_nec = nec_admissible(tau_k, (), (), CalculusId.GIL_CUT)
    box_chi0 = Interp(chi0, Bot)
    box_chi1 = Interp(chi1, Bot)

    merged = rt.ordering[:k] + rp.ordering + rt.ordering[k + 1 :]
    sigma_pi = mset(Interp(a, b) for a, b in rp.ordering)
    sigma_tau = mset(Interp(a, b) for idx, (a, b) in enumerate(rt.ordering) if idx != k)
    gamma0 = mset_sub(pi.sequent.left, sigma_pi)
    if gamma0 is None:
        raise InternalError("ordering formulas missing from the first premise")
    gamma2 = mset_sub(gamma0, mset_diff(sigma_tau, sigma_pi))
    if gamma2 is None:
        raise InternalError("weakening contexts of the two cut premises disagree")
    new_rule = InterpIK4(merged, rt.principal, gamma2, rt.weak_right)
    conclusion = new_rule.conclusion()
    premises = new_rule.premises(conclusion)
    total = len(merged)

    kids = []
    for idx, prem in enumerate(premises):
        pos = total - idx
        if pos < k:
            kids.append(_modal_premise_proof(tau, pos))
        elif k <= pos < k + m:
            i = pos - k
            kids.append(_rho_pi(pi, tau_k, tau_k_nec, i, chi1, box_chi1, prem))
        else:
            jj = pos - m + 1  # position in tau's family, k < jj <= n
            kids.append(
                _rho_tau(
                    pi_m,
                    pi_m_nec,
                    tau,
                    tau_k,
                    tau_k_nec,
                    jj,
                    chi0,
                    chi1,
                    box_chi0,
                    box_chi1,
                    prem,
                )
            )
    built = Proof(conclusion, new_rule, tuple(kids))
    dups = mset_inter(sigma_pi, sigma_tau)
    out = contract(built, dup_left=dups)
    if out.sequent != gd:
        raise InternalError(f"modal cut reduction built {out.sequent}, want {gd}")
    return out


def _rho_pi(pi, tau_k, tau_k_nec, i, chi1, box_chi1, prem: Sequent) -> Proof:
    """Premise for an ordering slot inherited from the first cut premise."""
    c1_t = prem.add(right=(chi1,))
    t1 = weaken_to(tau_k_nec, c1_t.add(right=(box_chi1,)))
    t2 = weaken_to(_modal_premise_proof(pi, i), c1_t.add(left=(box_chi1,)))
    c1 = Proof(c1_t, Cut(box_chi1), (t1, t2))
    t3 = weaken_to(tau_k, prem.add(left=(chi1,)))
    return Proof(prem, Cut(chi1), (c1, t3))


def _rho_tau(pi_m, pi_m_nec, tau, tau_k, tau_k_nec, jj, chi0, chi1,
             box_chi0, box_chi1, prem: Sequent) -> Proof:
    """Premise for an ordering slot inherited from the second cut premise,
    above the cut position."""
    c3_t = prem.add(right=(chi1,))
    c2_t = c3_t.add(left=(box_chi1,))
    c1_t = c2_t.add(right=(chi0,))
    u1 = weaken_to(pi_m_nec, c1_t.add(right=(box_chi0,)))
    u2 = weaken_to(_modal_premise_proof(tau, jj), c1_t.add(left=(box_chi0,)))
    c1 = Proof(c1_t, Cut(box_chi0), (u1, u2))
    u3 = weaken_to(pi_m, c2_t.add(left=(chi0,)))
    c2 = Proof(c2_t, Cut(chi0), (c1, u3))
    u4 = weaken_to(tau_k_nec, c3_t.add(right=(box_chi1,)))
    c3 = Proof(c3_t, Cut(box_chi1), (u4, c2))
    u5 = weaken_to(tau_k, prem.add(left=(chi1,)))
    return Proof(prem, Cut(chi1), (c3, u5))


# ---------------------------------------------------------------------------
# Cut elimination by reproof
# ---------------------------------------------------------------------------


def eliminate_cuts_reprove(s: Sequent, evidence: Proof) -> Proof:
    """Cut-free reproof: validates the evidence, searches the conclusion
    cut-free and translates; cut eliminability guarantees success, so a
    search failure is an internal error."""
    check_proof(evidence, CalculusId.FGIL_CUT)
    if evidence.sequent != s:
        raise ShapeMismatch("evidence does not conclude the requested sequent")
    out = prove_cut_free(s)
    check_proof(out, CalculusId.FGIL)
    if out.sequent != s:
        raise InternalError("reproof concluded the wrong sequent")
    return out
