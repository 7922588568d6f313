import pytest

from conftest import random_formula

from ilproof.formulas import (
    Atom,
    BnecF,
    Bot,
    Box,
    Dia,
    Imp,
    Interp,
    Neg,
    parse,
)
from ilproof.hilbert import (
    AxiomJust,
    HilbertLine,
    HilbertProof,
    ProofBuilder,
    axiom_instance,
    check_hilbert,
    derived_il,
)
from ilproof.golden import fgil_axiom_proof
from ilproof.proofs import (
    Proof,
    assumption,
    ax_proof,
    check_proof,
    local_height,
    node,
    unfold,
)
from ilproof.rules import (
    Ax,
    BotL,
    CalculusId,
    Cut,
    ImpL,
    InterpIK4,
    InterpIL,
)
from ilproof.search import Provable, SearchLimits, decide_il, prove
from ilproof.sequents import Sequent, parse_sequent, to_formula
from ilproof.transform import (
    DuplicateMissing,
    NoDuplicate,
    NotLocallyCutFree,
    PrincipalMissing,
    ShapeMismatch,
    alpha_prefix,
    contract,
    cut_reduce_step,
    cyclic_to_fgil,
    eliminate_cuts_reprove,
    hilbert_to_sequent,
    invert,
    lob,
    nec_admissible,
    prove_taut,
    sequent_to_hilbert,
    slim_step,
    weaken,
)
from ilproof.transform import _fragment_has_cut

p, q, r, s = Atom("p"), Atom("q"), Atom("r"), Atom("s")
FGIL = CalculusId.FGIL
FGIL_CUT = CalculusId.FGIL_CUT
GIL = CalculusId.GIL
GIL_CUT = CalculusId.GIL_CUT
GIL_SLIM = CalculusId.GIL_SLIM


def provable_tree(text):
    out = prove(parse_sequent(text))
    assert isinstance(out, Provable)
    return unfold(out.proof, 0)


class TestWeaken:
    def test_axiom_absorbs(self):
        out = weaken(ax_proof(p), (q,), ())
        check_proof(out, FGIL)
        assert out.sequent == parse_sequent("q, p => p")
        assert out.node_count() == 1

    def test_modal_weakening_part(self):
        base = ax_proof(Interp(p, q), calculus=FGIL)
        out = weaken(base, (r,), (s,))
        check_proof(out, FGIL)
        assert out.children == base.children

    def test_height_preserved(self, rng):
        for _ in range(200):
            f = random_formula(rng, 8)
            base = ax_proof(f, (q,), (r,), FGIL)
            out = weaken(base, (random_formula(rng, 4),), (random_formula(rng, 4),))
            check_proof(out, FGIL)
            assert out.height() == base.height()


class TestInvert:
    def test_impr(self):
        base = prove_taut(parse_sequent("=> p -> p"))
        out = invert(base, "ImpR", parse("p -> p"))
        check_proof(out, FGIL)
        assert out.sequent == parse_sequent("p => p")

    def test_botr(self):
        base = weaken(ax_proof(p), (), (Bot,))
        out = invert(base, "BotR")
        check_proof(out, FGIL)
        assert out.sequent == parse_sequent("p => p")

    def test_principal_missing(self):
        with pytest.raises(PrincipalMissing):
            invert(ax_proof(p), "ImpR", parse("p -> q"))

    def test_invert_then_reapply(self, rng):
        from ilproof.rules import ImpR

        count = 0
        tries = 0
        while count < 60 and tries < 1500:
            tries += 1
            a = random_formula(rng, 5)
            b = random_formula(rng, 5)
            f = Imp(a, b)
            out = prove(Sequent((), (f,)), SearchLimits(max_nodes=20000))
            if not isinstance(out, Provable):
                continue
            count += 1
            tree = unfold(out.proof, 2)
            inv = invert(tree, "ImpR", f)
            reapplied = Proof(Sequent((), (f,)), ImpR(a, b), (inv,))
            check_proof(reapplied, GIL_SLIM, allow_assumptions=True)
        assert count == 60

    def test_local_height_not_increased(self):
        base = provable_tree("=> (p |> q) -> (p |> q)")
        inv = invert(base, "ImpR", parse("(p |> q) -> (p |> q)"))
        assert local_height(inv) <= local_height(base)


class TestContract:
    def test_axiom(self):
        out = contract(ax_proof(p, (p,), ()), (p,), ())
        check_proof(out, FGIL)
        assert out.sequent == parse_sequent("p => p")

    def test_modal_ordering_contraction(self):
        # An instance whose ordering repeats the |>-formula itself.
        f = Interp(p, q)
        rule = InterpIK4(((p, q), (p, q)), (s, p), (), ())
        concl = rule.conclusion()
        prems = [assumption(x) for x in rule.premises(concl)]
        tree = Proof(concl, rule, tuple(prems))
        out = contract(tree, (f,), ())
        check_proof(out, GIL, allow_assumptions=True)
        assert out.sequent == concl.remove(left=(f,))

    def test_duplicate_missing(self):
        with pytest.raises(DuplicateMissing):
            contract(ax_proof(p), (p,), ())

    def test_conclusion_preserved_on_corpus(self, rng):
        for _ in range(150):
            f = random_formula(rng, 7)
            base = ax_proof(f, (f, q), (), FGIL)
            out = contract(base, (f,), ())
            check_proof(out, FGIL)
            assert out.sequent == Sequent((f, q), (f,))


class TestNecAdmissible:
    def test_example(self):
        base = ax_proof(p, (Interp(p, Bot),), ())
        out = nec_admissible(base, (q,), (r,))
        check_proof(out, FGIL)
        assert out.sequent == Sequent((Interp(p, Bot), q), (Interp(p, Bot), r))

    def test_degenerate_empty_sigma(self):
        refute = Proof(
            Sequent((Neg(parse("T")),), ()),
            ImpL(parse("T"), Bot),
            (prove_taut(Sequent((), (parse("T"),))), node(Sequent((Bot,), ()), BotL())),
        )
        out = nec_admissible(refute)
        check_proof(out, FGIL)
        assert out.sequent == Sequent((), (Box(parse("T")),))

    def test_height_growth_is_wrapper_depth(self, rng):
        for _ in range(50):
            f = random_formula(rng, 5)
            # input f, f|>F => f has the required shape with sigma = {f}
            inner = ax_proof(f, (Interp(f, Bot),), ())
            out = nec_admissible(inner, (), ())
            check_proof(out, FGIL)
            assert out.height() == inner.height() + 1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            nec_admissible(ax_proof(p, (q,), ()))


class TestLob:
    def test_example(self):
        base = ax_proof(p, (Interp(p, Bot), Interp(p, Bot)), ())
        out = lob(base)
        check_proof(out, FGIL_CUT)
        assert out.sequent == Sequent((p, Interp(p, Bot)), (p,))
        assert isinstance(out.rule, Cut) and out.rule.chi == Interp(p, Bot)

    def test_empty_sigma_accepted(self):
        # sigma empty means proving psi, psi|>F => ; use F for psi
        botleaf = node(Sequent((Bot, Interp(Bot, Bot)), ()), BotL())
        out = lob(botleaf, psi=Bot, sigma=())
        check_proof(out, FGIL_CUT)
        assert out.sequent == Sequent((Bot,), ())

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            lob(ax_proof(p, (q,), ()))


class TestHilbertBridge:
    def test_axiom_lines_use_golden_templates(self):
        h = HilbertProof(
            (HilbertLine(axiom_instance("J5", (p,)), AxiomJust("J5", (p,))),)
        )
        out = hilbert_to_sequent(h)
        check_proof(out, FGIL_CUT)
        assert out == fgil_axiom_proof("J5", (p,))

    def test_imp_to_interp_line(self):
        b = ProofBuilder()
        b.taut(Imp(p, p))
        h = derived_il("ImpToInterp", b.proof())
        out = hilbert_to_sequent(h)
        check_proof(out, FGIL_CUT)
        assert out.sequent == Sequent((), (Interp(p, p),))

    def test_l_axiom_line(self):
        h = HilbertProof((HilbertLine(axiom_instance("L", (p,)), AxiomJust("L", (p,))),))
        out = hilbert_to_sequent(h)
        check_proof(out, FGIL_CUT)
        assert out == fgil_axiom_proof("L", (p,))

    def test_sequent_to_hilbert_axiom_leaf(self):
        out = sequent_to_hilbert(ax_proof(p))
        check_hilbert(out, "il")
        assert out.theorem == Imp(p, p)

    def test_sequent_to_hilbert_appendix_j2(self):
        g = fgil_axiom_proof("J2", (p, q, r))
        out = sequent_to_hilbert(g)
        check_hilbert(out, "il")
        assert out.theorem == to_formula(g.sequent)

    def test_round_trip_equivalence_via_search(self):
        g = fgil_axiom_proof("J4", (p, q))
        h = sequent_to_hilbert(g)
        check_hilbert(h, "il")
        back = hilbert_to_sequent(h)
        check_proof(back, FGIL_CUT)
        # the round trip conserves the theorem up to provable equivalence
        assert decide_il(Imp(to_formula(back.sequent), to_formula(g.sequent)))
        assert decide_il(Imp(to_formula(g.sequent), to_formula(back.sequent)))


class TestAlphaPrefix:
    def test_propositional_total(self):
        base = prove_taut(parse_sequent("=> p -> q -> p"))
        out = alpha_prefix(base, 0)
        check_proof(out, GIL_CUT)
        assert not out.assumptions()

    def test_j5_fuel_two(self):
        g = fgil_axiom_proof("J5", (p,))
        out = alpha_prefix(g, 2)
        check_proof(out, GIL_CUT, allow_assumptions=True)
        assert out.rule.name == "ImpR" or out.rule.name == "InterpIK4"
        # count progress crossings above each assumption
        for path, n in out.iter_nodes():
            if n.is_assumption():
                cursor, crossings = out, 0
                for i in path:
                    if cursor.rule.progressing:
                        crossings += 1
                    cursor = cursor.children[i]
                assert crossings >= 2

    def test_fuel_monotone(self):
        g = fgil_axiom_proof("Four", (p,))

        def is_prefix(a, b):
            if a.is_assumption():
                return a.sequent == b.sequent
            return (
                a.sequent == b.sequent
                and a.rule == b.rule
                and all(is_prefix(x, y) for x, y in zip(a.children, b.children))
            )

        assert is_prefix(alpha_prefix(g, 1), alpha_prefix(g, 2))
        assert is_prefix(alpha_prefix(g, 2), alpha_prefix(g, 3))

    def test_conclusion_preserved(self):
        g = fgil_axiom_proof("K", (p, q))
        out = alpha_prefix(g, 1)
        assert out.sequent == g.sequent


class TestCyclicToFgil:
    def test_acyclic_example(self):
        out = prove(Sequent((), (Interp(Dia(p), p),)))
        wf = cyclic_to_fgil(out.proof, frozenset())
        check_proof(wf, FGIL)
        assert wf.sequent == Sequent((), (Interp(Dia(p), p),))

    def test_cyclic_example_terminates(self):
        f = Interp(p, BnecF(p))
        out = prove(Sequent((), (f,)))
        assert any(n.backlink is not None for n in out.proof.nodes)
        wf = cyclic_to_fgil(out.proof, frozenset())
        check_proof(wf, FGIL)
        assert wf.sequent == Sequent((), (f,))

    def test_lambda_covers_succedents(self):
        out = prove(parse_sequent("p |> q, q |> r => p |> r"))
        lam = frozenset((p, q, r))
        wf = cyclic_to_fgil(out.proof, lam)
        check_proof(wf, FGIL)
        # the added hypotheses appear boxed on the left
        for x in lam:
            assert Interp(x, Bot) in wf.sequent.left

    def test_corpus(self, rng):
        limits = SearchLimits(max_nodes=20000)
        done = 0
        tries = 0
        while done < 40 and tries < 1500:
            tries += 1
            f = random_formula(rng, 7)
            out = prove(Sequent((), (f,)), limits)
            if not isinstance(out, Provable):
                continue
            wf = cyclic_to_fgil(out.proof, frozenset())
            check_proof(wf, FGIL)
            assert wf.sequent == Sequent((), (f,))
            done += 1
        assert done == 40


class TestSlimStep:
    def test_spec_example(self):
        rule = InterpIK4(((p, q), (p, r)), (s, p), (), ())
        prems = [assumption(x) for x in rule.premises(rule.conclusion())]
        new_rule, new_prems = slim_step(rule, prems)
        assert new_rule.ordering == ((p, q),)
        assert Interp(p, r) in new_rule.weak_left
        rebuilt = Proof(new_rule.conclusion(), new_rule, tuple(new_prems))
        assert rebuilt.sequent == rule.conclusion()
        check_proof(rebuilt, GIL, allow_assumptions=True)

    def test_no_duplicate(self):
        rule = InterpIK4(((p, q),), (s, p), (), ())
        prems = [assumption(x) for x in rule.premises(rule.conclusion())]
        with pytest.raises(NoDuplicate):
            slim_step(rule, prems)

    def test_iteration_terminates(self):
        rule = InterpIK4(((p, q), (p, r), (p, s)), (s, p), (), ())
        prems = [assumption(x) for x in rule.premises(rule.conclusion())]
        steps = 0
        while True:
            try:
                rule, prems = slim_step(rule, prems)
                steps += 1
            except NoDuplicate:
                break
        assert steps == 2


class TestCutReduceStep:
    def test_atom_cut_against_axiom(self):
        pi = prove_taut(parse_sequent("q, q -> p => r, p, p"))
        tau = node(parse_sequent("p, q, q -> p => r, p"), Ax("p"))
        out = cut_reduce_step(pi, tau, p)
        check_proof(out, GIL_CUT, allow_assumptions=True)
        assert out.sequent == parse_sequent("q, q -> p => r, p")

    def test_principal_implication(self):
        # cut formula q -> q, principal in both premises
        chi = parse("q -> q")
        conj = parse("p & q")
        pi = prove_taut(Sequent((conj,), (q, chi)), GIL)
        assert isinstance(pi.rule, type(ImpL(p, q))) is False
        tau = Proof(
            Sequent((chi, conj), (q,)),
            ImpL(q, q),
            (
                prove_taut(Sequent((conj,), (q, q)), GIL),
                prove_taut(Sequent((q, conj), (q,)), GIL),
            ),
        )
        check_proof(tau, GIL)
        red = cut_reduce_step(pi, tau, chi)
        check_proof(red, GIL_CUT, allow_assumptions=True)
        assert red.sequent == Sequent((conj,), (q,))
        assert not _fragment_has_cut(red)

    def test_commute_through_context(self):
        out_pi = prove(Sequent((parse("p & q"),), (q, p)))
        out_tau = prove(Sequent((p, parse("p & q")), (q,)))
        assert isinstance(out_pi, Provable) and isinstance(out_tau, Provable)
        red = cut_reduce_step(unfold(out_pi.proof, 0), unfold(out_tau.proof, 0), p)
        check_proof(red, GIL_CUT, allow_assumptions=True)
        assert red.sequent == Sequent((parse("p & q"),), (q,))
        assert not _fragment_has_cut(red)

    def test_modal_clash(self):
        chi = Interp(q, r)
        out = prove(parse_sequent("q |> s, s |> r => q |> r"))
        assert isinstance(out, Provable)
        pi = weaken(unfold(out.proof, 0), (), (Interp(Dia(q), r),))
        t_rule = InterpIK4(((q, r),), (Dia(q), r), (Interp(q, s), Interp(s, r)), ())
        tau = Proof(
            t_rule.conclusion(),
            t_rule,
            tuple(prove_taut(x, GIL) for x in t_rule.premises(t_rule.conclusion())),
        )
        red = cut_reduce_step(pi, tau, chi)
        check_proof(red, GIL_CUT, allow_assumptions=True)
        assert not _fragment_has_cut(red)
        assert red.sequent == parse_sequent("q |> s, s |> r => <>q |> r")
        assert decide_il(to_formula(red.sequent))

    def test_rejects_cutful_fragment(self):
        chi = p
        cut_node = Proof(
            Sequent((), (q, p)),
            Cut(r),
            (
                assumption(Sequent((), (q, p, r))),
                assumption(Sequent((r,), (q, p))),
            ),
        )
        tau = assumption(Sequent((p,), (q,)))
        with pytest.raises(NotLocallyCutFree):
            cut_reduce_step(cut_node, tau, chi)


class TestEliminateCutsReprove:
    def test_axiom_k_evidence(self):
        h = HilbertProof((HilbertLine(axiom_instance("K", (p, q)), AxiomJust("K", (p, q))),))
        ev = hilbert_to_sequent(h)
        out = eliminate_cuts_reprove(ev.sequent, ev)
        check_proof(out, FGIL)
        assert not out.uses_rule(Cut)
        assert out.sequent == ev.sequent

    def test_box_transitivity(self):
        f = parse("[]p -> [][]p")
        ev = hilbert_to_sequent(
            HilbertProof((HilbertLine(axiom_instance("Four", (p,)), AxiomJust("Four", (p,))),))
        )
        out = eliminate_cuts_reprove(Sequent((), (f,)), ev)
        check_proof(out, FGIL)
        assert not out.uses_rule(Cut)

    def test_wrong_evidence_rejected(self):
        ev = prove_taut(parse_sequent("=> p -> p"))
        with pytest.raises(ShapeMismatch):
            eliminate_cuts_reprove(parse_sequent("=> q -> q"), ev)
