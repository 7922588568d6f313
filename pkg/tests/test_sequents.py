import pytest

from conftest import random_sequent

from ilproof.formulas import Atom, Bot, Imp, Interp, parse
from ilproof.sequents import (
    Sequent,
    an,
    fmt_sequent,
    interp_bot,
    mset,
    mset_diff,
    mset_inter,
    mset_sub,
    parse_sequent,
    su,
    sub_sequent,
    to_formula,
)

p, q, r = Atom("p"), Atom("q"), Atom("r")


def test_canonical_order_is_stable():
    a = Sequent((q, p, p), (r,))
    b = Sequent((p, q, p), (r,))
    assert a == b
    assert hash(a) == hash(b)
    assert a.left == mset((p, p, q))


def test_multiplicities_preserved():
    s = Sequent((p, p), ())
    assert s != Sequent((p,), ())
    assert len(s.left) == 2


def test_remove_checks_membership():
    s = parse_sequent("p, q => r")
    assert s.remove(left=(p,)) == parse_sequent("q => r")
    with pytest.raises(ValueError):
        s.remove(left=(r,))


def test_mset_operations():
    a = mset((p, p, q))
    b = mset((p, r))
    assert mset_sub(a, (p,)) == mset((p, q))
    assert mset_sub(a, b) is None
    assert mset_diff(a, b) == mset((p, q))
    assert mset_inter(a, b) == mset((p,))


def test_an_su():
    sigma = (Interp(p, q), Interp(p, r))
    assert an(sigma) == mset((p, p))
    assert su(sigma) == mset((q, r))
    assert interp_bot((p,)) == (Interp(p, Bot),)


def test_set_sequent():
    assert parse_sequent("p, q => r").is_set_sequent()
    s = parse_sequent("p, p => r")
    assert not s.is_set_sequent()
    assert s.set_contraction() == parse_sequent("p => r")


def test_to_formula():
    assert to_formula(parse_sequent("p => q")) == parse("p -> q")
    assert to_formula(parse_sequent("=>")) == parse("T -> F")
    assert to_formula(parse_sequent("p, q =>")) == parse("(p & q) -> F")


def test_sequent_parse_roundtrip(rng):
    for _ in range(100):
        s = random_sequent(rng, 9)
        assert parse_sequent(fmt_sequent(s)) == s


def test_sub_sequent_covers_both_sides():
    s = parse_sequent("p |> q => r")
    subs = sub_sequent(s)
    assert Interp(p, q) in subs and r in subs and Interp(p, Bot) in subs


def test_parse_sequent_errors():
    from ilproof.formulas import ParseError

    with pytest.raises(ParseError):
        parse_sequent("p -> q")
    with pytest.raises(ParseError):
        parse_sequent("p => q => r")
