"""Formulas of interpretability logic.

The core language has four constructors: atoms, falsum, implication and the
binary interpretability modality ``|>``.  Every other connective (negation,
conjunction, disjunction, box, diamond and the strengthened boxes) is an
abbreviation that is expanded away at construction time, so the rest of the
code base only ever deals with the four core cases.

Formulas are hash-consed: structurally equal formulas are the same object,
which makes equality, hashing and multiset bookkeeping cheap.
"""

from __future__ import annotations

from typing import Iterator, Mapping

ATOM = "atom"
BOT = "bot"
IMP = "imp"
INTERP = "interp"

RESERVED_PREFIX = "$x_"


class FormulaError(Exception):
    pass


class ParseError(FormulaError):
    """Raised on malformed formula text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ReservedNameError(FormulaError):
    """Raised when surface syntax names a reserved bound-variable atom."""


class ArityError(FormulaError):
    pass


class Formula:
    """Immutable, interned formula tree.

    ``kind`` is one of ``atom``, ``bot``, ``imp``, ``interp``; ``args`` holds
    the atom name or the argument formulas.  ``key`` is a structural sort key
    giving a deterministic total order on formulas, used for the canonical
    ordering of sequents.
    """

    __slots__ = ("kind", "args", "size", "key")

    _interned: dict = {}

    def __new__(cls, kind, args):
        cache_key = (kind, args)
        hit = cls._interned.get(cache_key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "args", args)
        if kind == ATOM:
            object.__setattr__(self, "size", 1)
            object.__setattr__(self, "key", (1, 0, args))
        elif kind == BOT:
            object.__setattr__(self, "size", 1)
            object.__setattr__(self, "key", (1, 1))
        else:
            left, right = args
            object.__setattr__(self, "size", left.size + right.size + 1)
            rank = 2 if kind == IMP else 3
            object.__setattr__(self, "key", (self.size, rank, left.key, right.key))
        cls._interned[cache_key] = self
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Formula objects are immutable")

    def __repr__(self):
        return f"Formula({fmt(self)!r})"

    def __str__(self):
        return fmt(self)

    @property
    def left(self) -> "Formula":
        return self.args[0]

    @property
    def right(self) -> "Formula":
        return self.args[1]

    @property
    def name(self) -> str:
        return self.args

    def is_atom(self) -> bool:
        return self.kind == ATOM

    def is_bot(self) -> bool:
        return self.kind == BOT

    def is_imp(self) -> bool:
        return self.kind == IMP

    def is_interp(self) -> bool:
        return self.kind == INTERP


def Atom(name: str) -> Formula:
    if not name:
        raise FormulaError("atom names must be nonempty")
    return Formula(ATOM, name)


Bot = Formula(BOT, ())


def Imp(a: Formula, b: Formula) -> Formula:
    return Formula(IMP, (a, b))


def Interp(a: Formula, b: Formula) -> Formula:
    return Formula(INTERP, (a, b))


# Abbreviations, expanded to the core connectives.

Top = Imp(Bot, Bot)


def Neg(a: Formula) -> Formula:
    return Imp(a, Bot)


def Or(a: Formula, b: Formula) -> Formula:
    return Imp(Neg(a), b)


def And(a: Formula, b: Formula) -> Formula:
    return Neg(Imp(a, Neg(b)))


def Box(a: Formula) -> Formula:
    return Interp(Neg(a), Bot)


def Dia(a: Formula) -> Formula:
    return Neg(Interp(a, Bot))


def BnecF(a: Formula) -> Formula:
    """Strengthened box (a |> F) & a."""
    return And(Interp(a, Bot), a)


def DnecF(a: Formula) -> Formula:
    """Strengthened box a & []a."""
    return And(a, Box(a))


_ABBREV = {
    "top": (0, lambda: Top),
    "neg": (1, Neg),
    "or": (2, Or),
    "and": (2, And),
    "box": (1, Box),
    "diamond": (1, Dia),
    "bnec": (1, BnecF),
    "dnec": (1, DnecF),
}


def abbrev(kind: str, args) -> Formula:
    """Expand a derived connective to its core form."""
    if kind not in _ABBREV:
        raise FormulaError(f"unknown abbreviation {kind!r}")
    arity, build = _ABBREV[kind]
    args = tuple(args)
    if len(args) != arity:
        raise ArityError(f"{kind} expects {arity} argument(s), got {len(args)}")
    return build(*args)


def big_and(formulas) -> Formula:
    """Conjunction of a list, folded right-associatively; empty list is T."""
    formulas = list(formulas)
    if not formulas:
        return Top
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = And(f, out)
    return out


def big_or(formulas) -> Formula:
    """Disjunction of a list, folded right-associatively; empty list is F."""
    formulas = list(formulas)
    if not formulas:
        return Bot
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = Or(f, out)
    return out


def Iff(a: Formula, b: Formula) -> Formula:
    return And(Imp(a, b), Imp(b, a))


# ---------------------------------------------------------------------------
# Metrics and traversals
# ---------------------------------------------------------------------------


def size(f: Formula) -> int:
    return f.size


def iter_subtrees(f: Formula) -> Iterator[Formula]:
    yield f
    if f.kind in (IMP, INTERP):
        yield from iter_subtrees(f.left)
        yield from iter_subtrees(f.right)


def subformulas(f: Formula) -> frozenset:
    """Modal-closed subformula set.

    The least set containing ``f`` such that implications contribute their
    arguments and each ``a |> b`` member contributes ``a``, ``b``, ``a |> F``,
    ``b |> F`` and ``F``.  This closure is what bounds the sequents reachable
    by backward application of the modal rules.
    """
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.kind == IMP:
            stack.append(g.left)
            stack.append(g.right)
        elif g.kind == INTERP:
            stack.append(g.left)
            stack.append(g.right)
            stack.append(Interp(g.left, Bot))
            stack.append(Interp(g.right, Bot))
            stack.append(Bot)
    return frozenset(seen)


def vocabulary(f: Formula) -> frozenset:
    """Set of atom names occurring in ``f``."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == ATOM:
            out.add(g.args)
        elif g.kind in (IMP, INTERP):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(out)


def check_vocabulary(names) -> frozenset:
    """Validate a user-supplied vocabulary: reserved names are rejected."""
    names = frozenset(names)
    for n in names:
        if n.startswith(RESERVED_PREFIX):
            raise ReservedNameError(f"{n!r} is a reserved bound-variable name")
    return names


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Simultaneous substitution of atoms; there are no binders to respect."""
    if not mapping:
        return f
    cache = {}

    def go(g):
        if g.kind == ATOM:
            return mapping.get(g.args, g)
        if g.kind == BOT:
            return g
        hit = cache.get(g)
        if hit is not None:
            return hit
        out = Formula(g.kind, (go(g.left), go(g.right)))
        cache[g] = out
        return out

    return go(f)


def modalized_in(f: Formula, name: str) -> bool:
    """True if every occurrence of the atom sits inside a ``|>``."""
    if f.kind == ATOM:
        return f.args != name
    if f.kind in (BOT, INTERP):
        return True
    return modalized_in(f.left, name) and modalized_in(f.right, name)


def propositional_in(f: Formula, name: str) -> bool:
    """True if no occurrence of the atom sits inside a ``|>``."""
    if f.kind in (ATOM, BOT):
        return True
    if f.kind == INTERP:
        return name not in vocabulary(f)
    return propositional_in(f.left, name) and propositional_in(f.right, name)


def sharp(f: Formula) -> Formula:
    """Translation eliminating persistence reasoning: a |> b becomes
    dnec(a# |> b#), homomorphic elsewhere."""
    if f.kind in (ATOM, BOT):
        return f
    if f.kind == IMP:
        return Imp(sharp(f.left), sharp(f.right))
    return DnecF(Interp(sharp(f.left), sharp(f.right)))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

# Grammar: atoms [a-z][a-z0-9_]*, `F` falsum, `T` verum; unary ~ [] <> bind
# tightest, then &, then |, then |>, then -> (right-associative).  &, |, |>
# are left-associative.


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.idx = 0

    def _scan(self):
        text = self.text
        i = 0
        n = len(text)
        while i < n:
            c = text[i]
            if c.isspace():
                i += 1
                continue
            start = i
            if c == "-" and text.startswith("->", i):
                self.tokens.append(("->", start))
                i += 2
            elif c == "|" and text.startswith("|>", i):
                self.tokens.append(("|>", start))
                i += 2
            elif c == "[" and text.startswith("[]", i):
                self.tokens.append(("[]", start))
                i += 2
            elif c == "<" and text.startswith("<>", i):
                self.tokens.append(("<>", start))
                i += 2
            elif c in "~&|()":
                self.tokens.append((c, start))
                i += 1
            elif c == "T" or c == "F":
                self.tokens.append((c, start))
                i += 1
            elif c == "$" or c.islower():
                j = i + 1
                while j < n and (text[j].islower() or text[j].isdigit() or text[j] == "_"):
                    j += 1
                name = text[i:j]
                if c == "$":
                    raise ReservedNameError(
                        f"atom {name!r} uses the reserved bound-variable prefix"
                    )
                self.tokens.append(("atom", start, name))
                i = j
            else:
                raise ParseError(f"unexpected character {c!r}", i)

    def peek(self):
        if self.idx < len(self.tokens):
            return self.tokens[self.idx]
        return ("<eof>", len(self.text))

    def next(self):
        tok = self.peek()
        self.idx += 1
        return tok


def parse(text: str) -> Formula:
    """Parse surface syntax into a core formula; sugar expands immediately."""
    lex = _Lexer(text)

    def parse_imp():
        left = parse_interp()
        tok = lex.peek()
        if tok[0] == "->":
            lex.next()
            right = parse_imp()
            return Imp(left, right)
        return left

    def parse_interp():
        left = parse_or()
        while lex.peek()[0] == "|>":
            lex.next()
            right = parse_or()
            left = Interp(left, right)
        return left

    def parse_or():
        left = parse_and()
        while lex.peek()[0] == "|":
            lex.next()
            right = parse_and()
            left = Or(left, right)
        return left

    def parse_and():
        left = parse_unary()
        while lex.peek()[0] == "&":
            lex.next()
            right = parse_unary()
            left = And(left, right)
        return left

    def parse_unary():
        tok = lex.peek()
        if tok[0] == "~":
            lex.next()
            return Neg(parse_unary())
        if tok[0] == "[]":
            lex.next()
            return Box(parse_unary())
        if tok[0] == "<>":
            lex.next()
            return Dia(parse_unary())
        return parse_primary()

    def parse_primary():
        tok = lex.next()
        if tok[0] == "atom":
            return Atom(tok[2])
        if tok[0] == "F":
            return Bot
        if tok[0] == "T":
            return Top
        if tok[0] == "(":
            inner = parse_imp()
            closing = lex.next()
            if closing[0] != ")":
                raise ParseError("expected ')'", closing[1])
            return inner
        raise ParseError(f"unexpected token {tok[0]!r}", tok[1])

    out = parse_imp()
    trailing = lex.peek()
    if trailing[0] != "<eof>":
        raise ParseError(f"unexpected token {trailing[0]!r}", trailing[1])
    return out


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# Precedence levels for minimal parenthesisation (higher binds tighter).
_PREC_IMP = 0
_PREC_INTERP = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_UNARY = 4


def match_neg(f: Formula):
    if f.kind == IMP and f.right.is_bot():
        return f.left
    return None


def match_and(f: Formula):
    # a & b  ==  ~(a -> ~b)
    if f.kind == IMP and f.right.is_bot():
        inner = f.left
        if inner.kind == IMP:
            neg = match_neg(inner.right)
            if neg is not None:
                return inner.left, neg
    return None


def match_or(f: Formula):
    # a | b  ==  ~a -> b
    if f.kind == IMP and not f.right.is_bot():
        neg = match_neg(f.left)
        if neg is not None:
            return neg, f.right
    return None


def match_box(f: Formula):
    if f.kind == INTERP and f.right.is_bot():
        neg = match_neg(f.left)
        if neg is not None:
            return neg
    return None


def match_dia(f: Formula):
    if f.kind == IMP and f.right.is_bot():
        inner = f.left
        if inner.kind == INTERP and inner.right.is_bot():
            return inner.left
    return None


def fmt(f: Formula, sugar: bool = True) -> str:
    """Render a formula; ``parse(fmt(f)) == f`` for any formula without
    reserved atoms.  With ``sugar`` the derived connectives are recovered."""

    def go(g, prec):
        if g.kind == ATOM:
            return g.args
        if g.kind == BOT:
            return "F"
        if sugar:
            if g == Top:
                return "T"
            boxed = match_box(g)
            if boxed is not None:
                return "[]" + go(boxed, _PREC_UNARY)
            dia = match_dia(g)
            if dia is not None:
                return "<>" + go(dia, _PREC_UNARY)
            both = match_and(g)
            if both is not None:
                a, b = both
                body = f"{go(a, _PREC_AND)} & {go(b, _PREC_UNARY)}"
                return body if prec <= _PREC_AND else f"({body})"
            either = match_or(g)
            if either is not None:
                a, b = either
                body = f"{go(a, _PREC_OR)} | {go(b, _PREC_AND)}"
                return body if prec <= _PREC_OR else f"({body})"
            neg = match_neg(g)
            if neg is not None:
                return "~" + go(neg, _PREC_UNARY)
        if g.kind == IMP:
            body = f"{go(g.left, _PREC_IMP + 1)} -> {go(g.right, _PREC_IMP)}"
            return body if prec <= _PREC_IMP else f"({body})"
        body = f"{go(g.left, _PREC_INTERP)} |> {go(g.right, _PREC_INTERP + 1)}"
        return body if prec <= _PREC_INTERP else f"({body})"

    return go(f, 0)
