import pytest

from conftest import random_formula, random_sequent

from ilproof.formulas import (
    Atom,
    BnecF,
    Bot,
    Box,
    Iff,
    Imp,
    Interp,
    Neg,
    Top,
    And,
    big_and,
    fmt,
    modalized_in,
    parse,
    vocabulary,
)
from ilproof.interpolation import (
    EquationalSystem,
    FixpointNotFound,
    InterpolationError,
    NotModalized,
    TemplateCheckError,
    TNode,
    Template,
    bound_var,
    build_template,
    check_template,
    enumerate_formulas,
    equations,
    fixpoint,
    ilp_interpolant,
    interpolant,
    order_equations,
    pre_interpolants,
    simplify,
    solve,
    star_index,
    verify_interpolant,
)
from ilproof.rules import Ax, BotL, ImpR, Repeat
from ilproof.search import decide_il, decide_ilp
from ilproof.sequents import Sequent, parse_sequent

p, q, r = Atom("p"), Atom("q"), Atom("r")


class TestBuildTemplate:
    def test_axiomatic_leaf(self):
        t = build_template(parse_sequent("p => p"))
        check_template(t)
        assert t.node_count() == 1
        assert isinstance(t.nodes[0].rule, Ax)

    def test_two_atoms(self):
        t = build_template(parse_sequent("p => q"))
        check_template(t)
        assert t.nodes[0].rule.name == "InterpStar"
        assert len(t.nodes[0].children) == 1
        assert t.nodes[1].rule.name == "Empty"

    def test_conjunction_leaves(self):
        t = build_template(Sequent((parse("p & q"),), ()))
        check_template(t)
        leaves = {n.rule.name for n in t.nodes if not n.children}
        assert leaves <= {"Ax", "BotL", "Empty", "Repeat"}

    def test_non_set_sequents_contract(self):
        t = build_template(parse_sequent("p, p => q"))
        check_template(t)
        assert t.nodes[0].rule.name == "Wk"

    def test_random_corpus(self, rng):
        for _ in range(100):
            s = random_sequent(rng, 8, max_side=2)
            t = build_template(s)
            check_template(t)

    def test_reserved_atoms_rejected(self):
        with pytest.raises(InterpolationError):
            build_template(Sequent((Atom("$x_1"),), ()))


class TestCheckTemplate:
    def test_determinism_violation(self):
        # the empty sequent closed by Empty in one branch but expanded by the
        # modal rule in another
        from ilproof.interpolation import InterpStar
        from ilproof.rules import Empty, ImpL

        empty = Sequent((), ())
        star = InterpStar(star_index((), ()))
        bad = Template(
            [
                TNode(parse_sequent("p -> p =>"), ImpL(p, p), (1, 2)),
                TNode(parse_sequent("=> p"), star, (3,)),
                TNode(parse_sequent("p =>"), star, (4,)),
                TNode(empty, Empty(), ()),
                TNode(empty, star, (5,)),
                TNode(empty, __import__("ilproof.rules", fromlist=["Repeat"]).Repeat(), (), 4),
            ]
        )
        with pytest.raises(TemplateCheckError) as err:
            check_template(bad)
        assert "determinism" in str(err.value)

    def test_weakening_condition_violation(self):
        # a non-set sequent concluded by ImpR is rejected
        s = parse_sequent("p, p => p -> q")
        bad = Template(
            [
                TNode(s, ImpR(p, q), (1,)),
                TNode(parse_sequent("p, p, p => q"), BotL() if False else Ax("p"), ()),
            ]
        )
        with pytest.raises(TemplateCheckError):
            check_template(bad)

    def test_mutated_rule_detected(self, rng):
        t = build_template(Sequent((parse("p & q"),), ()))
        # replace one inner non-repeat rule by Ax and expect a failure
        for nid, n in enumerate(t.nodes):
            if n.children:
                bad = Template(list(t.nodes))
                bad.nodes[nid] = TNode(n.sequent, Ax("p"), ())
                with pytest.raises(TemplateCheckError):
                    check_template(bad)
                break


class TestPreInterpolants:
    def test_leaf_values(self):
        t = build_template(parse_sequent("p => p"))
        rho = pre_interpolants(t, {"p"})
        assert rho[0] == Bot

    def test_empty_leaf(self):
        t = build_template(parse_sequent("p => q"))
        rho = pre_interpolants(t, {"p", "q"})
        assert rho[1] == Top

    def test_hand_computed_example(self):
        t = build_template(parse_sequent("p => q"))
        rho = pre_interpolants(t, {"p", "q"})
        expected = big_and([Interp(Neg(Top), Bot), p, Neg(q)])
        assert rho[0] == expected
        assert decide_il(Iff(rho[0], And(p, Neg(q))))

    def test_implication_left_is_disjunction(self):
        t = build_template(parse_sequent("p -> q =>"))
        rho = pre_interpolants(t, {"p", "q"})
        root = t.nodes[0]
        from ilproof.formulas import match_or

        assert match_or(rho[0]) is not None

    def test_vocabulary_restriction(self):
        t = build_template(parse_sequent("p, q =>"))
        rho_full = pre_interpolants(t, {"p", "q"})
        rho_p = pre_interpolants(t, {"p"})
        assert "q" in vocabulary(rho_full[0])
        assert "q" not in vocabulary(rho_p[0])


class TestEquations:
    def test_acyclic_system_empty(self):
        t = build_template(parse_sequent("p => p"))
        rho = pre_interpolants(t, {"p"})
        e = equations(t, rho, {"p"})
        assert e.bound == ()
        assert order_equations(e) == []
        assert solve(e) == {}

    def test_repeat_introduces_equation(self):
        t = build_template(Sequent((Interp(p, q),), ()))
        rho = pre_interpolants(t, {"p"})
        e = equations(t, rho, {"p"})
        assert e.bound
        for nid, n in enumerate(t.nodes):
            if isinstance(n.rule, Repeat):
                assert e.equations[bound_var(nid)] == rho[n.backlink]

    def test_bound_variable_locality(self, rng):
        """A bound variable occurs only at or below its Repeat's companion."""
        corpus = [
            Sequent((Interp(p, q),), ()),
            Sequent((), (Interp(p, BnecF(p)),)),
            parse_sequent("p |> q => q |> p"),
        ]
        for _ in range(20):
            corpus.append(random_sequent(rng, 6, max_side=2))
        for s in corpus:
            t = build_template(s)
            rho = pre_interpolants(t, frozenset())
            parent = t.parent_map()

            def ancestors_of(nid):
                out = set()
                while nid in parent:
                    nid = parent[nid]
                    out.add(nid)
                return out

            for nid, n in enumerate(t.nodes):
                if isinstance(n.rule, Repeat):
                    x = bound_var(nid)
                    holders = [
                        v for v, m in enumerate(t.nodes) if x in vocabulary(rho[v])
                    ]
                    allowed = ancestors_of(nid) | {nid}
                    for v in holders:
                        assert v in allowed, (s, v, nid)

    def test_modalization_across_modal_steps(self, rng):
        corpus = [Sequent((Interp(p, q),), ()), Sequent((), (Interp(p, BnecF(p)),))]
        for _ in range(20):
            corpus.append(random_sequent(rng, 6, max_side=2))
        for s in corpus:
            t = build_template(s)
            rho = pre_interpolants(t, frozenset())
            parent = t.parent_map()
            for nid, n in enumerate(t.nodes):
                if not isinstance(n.rule, Repeat):
                    continue
                x = bound_var(nid)
                # walk from the companion down to the repeat, tracking when a
                # modal step is crossed
                path = [nid]
                cursor = nid
                while cursor != n.backlink:
                    cursor = parent[cursor]
                    path.append(cursor)
                path.reverse()  # companion .. repeat
                crossed = False
                for i, v in enumerate(path[:-1]):
                    if t.nodes[v].rule.name == "InterpStar":
                        crossed = True
                if crossed:
                    assert modalized_in(rho[n.backlink], x)

    def test_orderability_on_corpus(self, rng):
        for _ in range(30):
            s = random_sequent(rng, 6, max_side=2)
            t = build_template(s)
            rho = pre_interpolants(t, frozenset())
            e = equations(t, rho)
            order = order_equations(e)
            assert sorted(order) == sorted(e.bound)


class TestFixpoint:
    def test_constant(self):
        assert fixpoint(q, "x") == q

    def test_box(self):
        out = fixpoint(Box(Atom("x")), "x")
        assert decide_il(Iff(out, Top))
        assert decide_il(Iff(out, Box(out)))

    def test_neg_box(self):
        phi = Neg(Box(Atom("x")))
        out = fixpoint(phi, "x")
        assert decide_il(Iff(out, Neg(Box(Bot))))
        assert decide_il(Iff(out, Neg(Box(out))))

    def test_not_modalized(self):
        with pytest.raises(NotModalized):
            fixpoint(Imp(Atom("x"), q), "x")

    def test_cap_respected(self):
        with pytest.raises(FixpointNotFound):
            # an equivalence never reached in zero iterations is impossible,
            # so force cap=0 on a formula that needs at least one
            fixpoint(Neg(Box(Atom("x"))), "x", cap=1)


class TestSolve:
    def test_box_system(self):
        e = EquationalSystem(("$x_0",), {"$x_0": Box(Atom("$x_0"))})
        sol = solve(e)
        assert decide_il(Iff(sol["$x_0"], Top))

    def test_template_systems_validate(self, rng):
        corpus = [Sequent((Interp(p, q),), ()), Sequent((), (Interp(p, BnecF(p)),))]
        for s in corpus:
            t = build_template(s)
            rho = pre_interpolants(t, frozenset())
            e = equations(t, rho)
            sol = solve(e)
            for x in e.bound:
                from ilproof.formulas import substitute

                assert decide_il(Iff(sol[x], substitute(e.equations[x], sol)))


class TestInterpolant:
    def test_bot(self):
        out = interpolant(Bot, {"p"})
        assert decide_il(Iff(out, Bot))

    def test_conjunction_projection(self):
        out = interpolant(parse("p & q"), {"p"})
        assert decide_il(Imp(out, p)) and decide_il(Imp(p, out))

    def test_empty_vocabulary(self):
        out = interpolant(p, frozenset())
        assert decide_il(Iff(out, Top))

    def test_raw_flag(self):
        raw = interpolant(parse("p & q"), {"p"}, raw=True)
        cooked = interpolant(parse("p & q"), {"p"})
        assert decide_il(Iff(raw, cooked))
        assert cooked.size <= raw.size


class TestVerify:
    def test_projection_passes(self):
        rep = verify_interpolant(parse("p & q"), {"p"}, p, 5)
        assert rep.ok and rep.vocab_ok and rep.implication_ok

    def test_top_fails_minimality(self):
        rep = verify_interpolant(p, {"p"}, Top, 5)
        assert not rep.ok
        assert p in rep.failures

    def test_vocab_violation_reported(self):
        rep = verify_interpolant(parse("p & q"), {"p"}, q, 3)
        assert not rep.vocab_ok

    def test_enumeration_is_exhaustive(self):
        fs = enumerate_formulas({"p"}, 3)
        # size 1: F, p; size 3: imp and interp over {F,p}^2
        assert len(fs) == 2 + 2 * 4
        assert len(set(fs)) == len(fs)


class TestIlp:
    def test_projection(self):
        out = ilp_interpolant(parse("p & q"), {"p"})
        rep = verify_interpolant(parse("p & q"), {"p"}, out, 4, logic="ilp")
        assert rep.ok

    def test_bot(self):
        out = ilp_interpolant(Bot, {"p"})
        assert decide_ilp(Iff(out, Bot))

    def test_vocab_preserved(self, rng):
        for _ in range(20):
            f = random_formula(rng, 6)
            voc = frozenset(list(vocabulary(f))[:1])
            out = ilp_interpolant(f, voc)
            assert vocabulary(out) <= voc


class TestSimplify:
    def test_modal_left_intact(self):
        f = Interp(Neg(Top), Bot)
        assert simplify(f) == f

    def test_top_absorption(self):
        assert simplify(And(p, Top)) == p
        assert simplify(parse("(p | F) & T")) == p

    def test_double_negation(self):
        assert simplify(Neg(Neg(p))) == p

    def test_equivalence_spot_check(self, rng):
        from ilproof.search import SearchLimits

        limits = SearchLimits(max_nodes=100000)
        checked = 0
        for _ in range(100):
            f = random_formula(rng, 7)
            g = simplify(f)
            try:
                assert decide_il(Iff(f, g), limits)
                checked += 1
            except Exception:
                continue
        assert checked >= 80
