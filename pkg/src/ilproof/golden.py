"""Cut-free wellfounded proofs of the axiom schemes.

Each builder assembles the fgil derivation of one axiom instance from the
elementary constructors; the modal steps spell out their ordering and
principal formula explicitly.  These proofs back the axiom lines of the
Hilbert-to-sequent translation and are frozen as golden fixtures.
"""

from __future__ import annotations

from .formulas import Bot, Box, Dia, Formula, Imp, Interp, Neg, Or
from .hilbert import SCHEMES, axiom_instance
from .proofs import Proof, ax_proof, derived_rule, node
from .rules import BotL, ImpL, ImpR, InterpIL
from .sequents import Sequent, interp_bot, mset


def il_node(ordering, principal, weak_left, weak_right, main):
    """Modal node with diagonal; ``main`` maps premise index -> subproof,
    missing premises must close by BotL."""
    rule = InterpIL(tuple(ordering), principal, mset(weak_left), mset(weak_right))
    conclusion = rule.conclusion()
    premises = rule.premises(conclusion)
    m = len(ordering)
    kids = []
    for idx, prem in enumerate(premises):
        i = m - idx
        sub = main.get(i)
        if sub is not None:
            if sub.sequent != prem:
                raise AssertionError(f"premise {i} is {prem}, built {sub.sequent}")
            kids.append(sub)
        else:
            if Bot not in prem.left:
                raise AssertionError(f"premise {i} = {prem} does not close by BotL")
            kids.append(node(prem, BotL()))
    return Proof(conclusion, rule, tuple(kids))


def imp_r(p: Proof, phi: Formula, psi: Formula) -> Proof:
    rule = ImpR(phi, psi)
    conclusion = p.sequent.remove(left=(phi,), right=(psi,)).add(right=(Imp(phi, psi),))
    return Proof(conclusion, rule, (p,))


def imp_l(phi, psi, p0: Proof, p1: Proof) -> Proof:
    ctx = p0.sequent.remove(right=(phi,))
    conclusion = ctx.add(left=(Imp(phi, psi),))
    return Proof(conclusion, ImpL(phi, psi), (p0, p1))


def neg_l(phi, p):
    return derived_rule("negL", (phi,), [p])


def neg_r(phi, p):
    return derived_rule("negR", (phi,), [p])


def _k_proof(a, b):
    ab = Imp(a, b)
    boxes = interp_bot((Neg(b), Neg(ab), Neg(a), Bot))
    leaf_a = ax_proof(a, boxes, (Bot, b))
    leaf_b = ax_proof(b, (a,) + boxes, (Bot,))
    n1 = imp_l(a, b, leaf_a, leaf_b)
    n2 = neg_r(a, n1)
    n3 = neg_r(ab, n2)
    n4 = neg_l(b, n3)
    core = il_node(
        [(Neg(ab), Bot), (Neg(a), Bot)], (Neg(b), Bot), (), (), {2: n4}
    )
    n5 = imp_r(core, Box(a), Box(b))
    return imp_r(n5, Box(ab), Imp(Box(a), Box(b)))


def _four_proof(a):
    na = Neg(a)
    boxes = interp_bot((Neg(Box(a)), na, Bot))
    inner = ax_proof(Box(a), (Interp(Neg(Box(a)), Bot), Interp(Bot, Bot)), (na, Bot))
    n1 = neg_l(Box(a), inner)
    core = il_node([(na, Bot)], (Neg(Box(a)), Bot), (), (), {1: n1})
    return imp_r(core, Box(a), Box(Box(a)))


def _l_proof(a):
    na = Neg(a)
    lob_arg = Imp(Box(a), a)
    boxes = interp_bot((na, Neg(lob_arg), Bot))
    leaf_box = ax_proof(Box(a), interp_bot((Neg(lob_arg), Bot)), (Bot, a))
    leaf_a = ax_proof(a, boxes, (Bot,))
    w1 = imp_l(Box(a), a, leaf_box, leaf_a)
    w2 = neg_r(lob_arg, w1)
    w3 = neg_l(a, w2)
    core = il_node([(Neg(lob_arg), Bot)], (na, Bot), (), (), {1: w3})
    return imp_r(core, Box(lob_arg), Box(a))


def _j1_proof(a, b):
    ab = Imp(a, b)
    boxes = interp_bot((a, Neg(ab), b))
    leaf_a = ax_proof(a, boxes, (b,))
    leaf_b = ax_proof(b, (a,) + boxes, ())
    n1 = imp_l(a, b, leaf_a, leaf_b)
    n2 = neg_r(ab, n1)
    core = il_node([(Neg(ab), Bot)], (a, b), (), (), {1: n2})
    return imp_r(core, Box(ab), Interp(a, b))


def _j2_core(x, y, z):
    """x |> y, y |> z => x |> z, by the modal rule with ordering y|>z, x|>y."""
    p2 = ax_proof(x, interp_bot((x, y, x, z)), (y, z))
    p1 = ax_proof(y, interp_bot((y, y, z)), (z,))
    p0 = ax_proof(z, interp_bot((z, z)), ())
    return il_node([(y, z), (x, y)], (x, z), (), (), {2: p2, 1: p1, 0: p0})


def _j2_proof(a, b, c):
    core = _j2_core(a, b, c)
    left = derived_rule("andL", (Interp(a, b), Interp(b, c)), [core])
    return imp_r(left, _conj(Interp(a, b), Interp(b, c)), Interp(a, c))


def _conj(x, y):
    from .formulas import And

    return And(x, y)


def _j3_proof(a, b, c):
    x, y, z = a, b, c
    boxes = interp_bot((Or(x, z), x, z, y))
    leaf_x = ax_proof(x, boxes, (z, y))
    leaf_z = ax_proof(z, boxes, (x, y))
    p2 = derived_rule("orL", (x, z), [leaf_x, leaf_z])
    p1 = ax_proof(y, interp_bot((y, x, y)), (x,))
    p0 = ax_proof(y, interp_bot((y, y)), ())
    core = il_node([(x, y), (z, y)], (Or(x, z), y), (), (), {2: p2, 1: p1, 0: p0})
    left = derived_rule("andL", (Interp(x, y), Interp(z, y)), [core])
    return imp_r(left, _conj(Interp(x, y), Interp(z, y)), Interp(Or(x, z), y))


def _j4_proof(a, b):
    core = _j2_core(a, b, Bot)
    n1 = neg_r(Interp(b, Bot), core)
    n2 = neg_l(Interp(a, Bot), n1)
    n3 = imp_r(n2, Dia(a), Dia(b))
    return imp_r(n3, Interp(a, b), Imp(Dia(a), Dia(b)))


def _j5_proof(a):
    inner = ax_proof(Interp(a, Bot), (Interp(Dia(a), Bot),), (a,))
    prem = neg_l(Interp(a, Bot), inner)
    return il_node([], (Dia(a), a), (), (), {0: prem})


_BUILDERS = {
    "K": _k_proof,
    "Four": _four_proof,
    "L": _l_proof,
    "J1": _j1_proof,
    "J2": _j2_proof,
    "J3": _j3_proof,
    "J4": _j4_proof,
    "J5": _j5_proof,
}


def fgil_axiom_proof(scheme: str, args) -> Proof:
    """Cut-free fgil proof of ``=> axiom_instance(scheme, args)``."""
    args = tuple(args)
    if scheme not in _BUILDERS:
        raise ValueError(f"no sequent proof builder for scheme {scheme!r}")
    if len(args) != SCHEMES[scheme]:
        raise ValueError(f"{scheme} expects {SCHEMES[scheme]} arguments")
    proof = _BUILDERS[scheme](*args)
    want = Sequent((), (axiom_instance(scheme, args),))
    if proof.sequent != want:
        raise AssertionError(f"builder for {scheme} proved {proof.sequent}, want {want}")
    return proof
