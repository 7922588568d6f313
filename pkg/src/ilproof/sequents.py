"""Sequents as ordered pairs of finite formula multisets.

Multisets are kept in a canonical order (the structural total order on
formulas), so two sequents are equal exactly when they have the same formulas
with the same multiplicities on each side.  That makes repeat detection and
rule checking a matter of tuple comparison.
"""

from __future__ import annotations

from typing import Iterable, Tuple

from .formulas import (
    Bot,
    Formula,
    Imp,
    Interp,
    ParseError,
    big_and,
    big_or,
    fmt,
    parse,
    subformulas,
)

FTuple = Tuple[Formula, ...]


def mset(formulas: Iterable[Formula]) -> FTuple:
    """Canonically ordered multiset."""
    return tuple(sorted(formulas, key=lambda f: f.key))


def mset_add(a: Iterable[Formula], b: Iterable[Formula]) -> FTuple:
    return mset(tuple(a) + tuple(b))


def mset_sub(a: Iterable[Formula], b: Iterable[Formula]):
    """Multiset difference; returns None when ``b`` is not contained in ``a``."""
    counts = {}
    for f in a:
        counts[f] = counts.get(f, 0) + 1
    for f in b:
        c = counts.get(f, 0)
        if c == 0:
            return None
        counts[f] = c - 1
    out = []
    for f, c in counts.items():
        out.extend([f] * c)
    return mset(out)


def mset_diff(a: Iterable[Formula], b: Iterable[Formula]) -> FTuple:
    """Saturating multiset difference: occurrences of ``b`` are removed from
    ``a`` as far as they exist."""
    counts = {}
    for f in a:
        counts[f] = counts.get(f, 0) + 1
    for f in b:
        if counts.get(f, 0) > 0:
            counts[f] -= 1
    out = []
    for f, c in counts.items():
        out.extend([f] * c)
    return mset(out)


def mset_inter(a: Iterable[Formula], b: Iterable[Formula]) -> FTuple:
    counts = {}
    for f in a:
        counts[f] = counts.get(f, 0) + 1
    out = []
    for f in b:
        c = counts.get(f, 0)
        if c > 0:
            counts[f] = c - 1
            out.append(f)
    return mset(out)


def mset_contains(a: Iterable[Formula], b: Iterable[Formula]) -> bool:
    return mset_sub(a, b) is not None


def mset_set(a: Iterable[Formula]) -> FTuple:
    """Set contraction: one occurrence of each distinct formula."""
    return tuple(sorted(set(a), key=lambda f: f.key))


class Sequent:
    __slots__ = ("left", "right", "_hash")

    def __init__(self, left: Iterable[Formula] = (), right: Iterable[Formula] = ()):
        object.__setattr__(self, "left", mset(left))
        object.__setattr__(self, "right", mset(right))
        object.__setattr__(self, "_hash", hash((self.left, self.right)))

    def __setattr__(self, name, value):
        raise AttributeError("Sequent objects are immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Sequent)
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Sequent({fmt_sequent(self)!r})"

    def __str__(self):
        return fmt_sequent(self)

    @property
    def size(self) -> int:
        return sum(f.size for f in self.left) + sum(f.size for f in self.right)

    def add(self, left=(), right=()) -> "Sequent":
        return Sequent(self.left + tuple(left), self.right + tuple(right))

    def remove(self, left=(), right=()) -> "Sequent":
        new_left = mset_sub(self.left, left)
        new_right = mset_sub(self.right, right)
        if new_left is None or new_right is None:
            raise ValueError(f"cannot remove {left}/{right} from {self}")
        return Sequent(new_left, new_right)

    def is_set_sequent(self) -> bool:
        return len(set(self.left)) == len(self.left) and len(set(self.right)) == len(
            self.right
        )

    def set_contraction(self) -> "Sequent":
        return Sequent(mset_set(self.left), mset_set(self.right))

    def shared_atoms(self) -> FTuple:
        rights = {f for f in self.right if f.is_atom()}
        return tuple(f for f in mset_set(self.left) if f.is_atom() and f in rights)


def an(sigma: Iterable[Formula]) -> FTuple:
    """Multiset of antecedents of a multiset of ``|>``-formulas."""
    return mset(f.left for f in sigma)


def su(sigma: Iterable[Formula]) -> FTuple:
    """Multiset of succedents of a multiset of ``|>``-formulas."""
    return mset(f.right for f in sigma)


def interp_bot(formulas: Iterable[Formula]) -> FTuple:
    """The multiset {a |> F : a in formulas}."""
    return mset(Interp(f, Bot) for f in formulas)


def sub_sequent(s: Sequent) -> frozenset:
    out = frozenset()
    for f in s.left + s.right:
        out = out | subformulas(f)
    return out


def to_formula(s: Sequent) -> Formula:
    """Conjunction of the left side implies disjunction of the right side."""
    return Imp(big_and(s.left), big_or(s.right))


def fmt_sequent(s: Sequent, sugar: bool = True) -> str:
    left = ", ".join(fmt(f, sugar) for f in s.left)
    right = ", ".join(fmt(f, sugar) for f in s.right)
    return f"{left} => {right}".strip()


def parse_sequent(text: str) -> Sequent:
    """Parse ``G => D`` with comma-separated formulas on each side."""
    parts = text.split("=>")
    if len(parts) != 2:
        raise ParseError("sequent must contain exactly one '=>'", text.find("=>"))
    left, right = parts

    def side(chunk):
        chunk = chunk.strip()
        if not chunk:
            return ()
        return tuple(parse(piece) for piece in chunk.split(","))

    return Sequent(side(left), side(right))
