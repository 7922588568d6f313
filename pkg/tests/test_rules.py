import pytest

from conftest import random_formula, random_sequent

import random

from ilproof.formulas import Atom, Bot, Imp, Interp, parse
from ilproof.rules import (
    Ax,
    BotL,
    BotR,
    CalculusId,
    Ctr,
    Cut,
    Equiv,
    ImpL,
    ImpR,
    InterpIK4,
    InterpIK4Slim,
    InterpIL,
    RuleMismatch,
    Wk,
    admits,
    premises_of,
)
from ilproof.sequents import Sequent, parse_sequent

p, q, r = Atom("p"), Atom("q"), Atom("r")


def test_interp_ik4_spec_example():
    rule = InterpIK4(((p, q),), (p, q), (), ())
    prems = premises_of(rule, parse_sequent("p |> q => p |> q"))
    assert prems == [
        parse_sequent("p, p |> F, q |> F => p, q"),
        parse_sequent("q, q |> F => q"),
    ]


def test_interp_il_diagonal():
    rule = InterpIL(((p, q),), (p, q), (), ())
    prems = premises_of(rule, parse_sequent("p |> q => p |> q"))
    assert prems == [
        parse_sequent("p, p |> F, p |> F, q |> F => p, q"),
        parse_sequent("q, q |> F, q |> F => q"),
    ]


def test_impr_premise():
    assert premises_of(ImpR(p, q), parse_sequent("=> p -> q")) == [parse_sequent("p => q")]


def test_cut_premises():
    x = Atom("x")
    assert premises_of(Cut(x), parse_sequent("p => q")) == [
        parse_sequent("p => q, x"),
        parse_sequent("x, p => q"),
    ]


def test_rule_mismatch():
    with pytest.raises(RuleMismatch):
        premises_of(ImpR(p, q), parse_sequent("=> p"))
    with pytest.raises(RuleMismatch):
        premises_of(Ax("p"), parse_sequent("p => q"))
    with pytest.raises(RuleMismatch):
        premises_of(InterpIK4Slim(((p, q), (p, r)), (r, q), (), ()),
                    Sequent((Interp(p, q), Interp(p, r)), (Interp(r, q),)))


def test_weakening_and_contraction_rules():
    assert premises_of(Wk((p,), (q,)), parse_sequent("p, r => q")) == [parse_sequent("r =>")]
    assert premises_of(Ctr((p,), ()), parse_sequent("p, r => q")) == [parse_sequent("p, p, r => q")]


def test_modal_reconstruction_roundtrip(rng):
    """Rebuilding the conclusion from the stored rule data is the identity."""
    for _ in range(200):
        m = rng.randint(0, 3)
        ordering = tuple(
            (random_formula(rng, 3), random_formula(rng, 3)) for _ in range(m)
        )
        principal = (random_formula(rng, 3), random_formula(rng, 3))
        weak_l = tuple(random_formula(rng, 3) for _ in range(rng.randint(0, 2)))
        weak_r = tuple(random_formula(rng, 3) for _ in range(rng.randint(0, 2)))
        rule = InterpIL(ordering, principal, weak_l, weak_r)
        conclusion = rule.conclusion()
        prems = premises_of(rule, conclusion)
        assert len(prems) == m + 1
        # conclusion reconstruction from rule data
        assert conclusion == Sequent(
            tuple(Interp(a, b) for a, b in ordering) + weak_l,
            (Interp(*principal),) + weak_r,
        )


def test_calculus_admission():
    assert admits(CalculusId.FGIL, InterpIL((), (p, q)))
    assert not admits(CalculusId.FGIL, InterpIK4((), (p, q)))
    assert not admits(CalculusId.FGIL, Cut(p))
    assert admits(CalculusId.FGIL_CUT, Cut(p))
    assert admits(CalculusId.GIL, InterpIK4((), (p, q)))
    assert admits(CalculusId.GIL, InterpIK4Slim((), (p, q)))
    assert not admits(CalculusId.GIL_SLIM, InterpIK4((), (p, q)))
    assert admits(CalculusId.GIL_SLIM, InterpIK4Slim((), (p, q)))
    assert admits(CalculusId.AUX_GIL, Wk())
    assert admits(CalculusId.AUX_GIL, Ctr())
    assert admits(CalculusId.AUX_GIL, Equiv(p, q))
    assert not admits(CalculusId.GIL, Wk())


def test_progressing_premises():
    assert InterpIK4((), (p, q)).progressing
    assert InterpIK4Slim((), (p, q)).progressing
    assert not InterpIL((), (p, q)).progressing
    assert not ImpL(p, q).progressing
    assert not Wk().progressing
