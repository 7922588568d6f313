"""Sequent rules and calculi.

A rule application stores everything needed to recompute its premises from
its conclusion, so proof checking is purely local.  The two modal rules keep
the chosen ordering of ``|>``-formulas and the weakening split explicitly:
the same conclusion admits many instances, one per ordering.

Premises of the modal rules are listed left-to-right as i = m..0, i.e. the
premise belonging to the principal formula comes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

from .formulas import Bot, Formula, Interp
from .sequents import Sequent, interp_bot, mset, mset_sub

FPair = Tuple[Formula, Formula]


class RuleError(Exception):
    pass


class RuleMismatch(RuleError):
    """The rule application does not fit the given conclusion."""


@dataclass(frozen=True)
class RuleApp:
    name = "?"
    progressing = False

    def arity(self) -> int:
        raise NotImplementedError

    def premises(self, conclusion: Sequent):
        raise NotImplementedError


@dataclass(frozen=True)
class Ax(RuleApp):
    atom: str
    name = "Ax"

    def arity(self):
        return 0

    def premises(self, conclusion):
        from .formulas import Atom

        a = Atom(self.atom)
        if a not in conclusion.left or a not in conclusion.right:
            raise RuleMismatch(f"atom {self.atom} must occur on both sides")
        return []


@dataclass(frozen=True)
class BotL(RuleApp):
    name = "BotL"

    def arity(self):
        return 0

    def premises(self, conclusion):
        if Bot not in conclusion.left:
            raise RuleMismatch("F must occur on the left")
        return []


@dataclass(frozen=True)
class BotR(RuleApp):
    name = "BotR"

    def arity(self):
        return 1

    def premises(self, conclusion):
        if Bot not in conclusion.right:
            raise RuleMismatch("F must occur on the right")
        return [conclusion.remove(right=(Bot,))]


@dataclass(frozen=True)
class ImpL(RuleApp):
    phi: Formula
    psi: Formula
    name = "ImpL"

    def arity(self):
        return 2

    def premises(self, conclusion):
        from .formulas import Imp

        main = Imp(self.phi, self.psi)
        if main not in conclusion.left:
            raise RuleMismatch(f"{main} must occur on the left")
        ctx = conclusion.remove(left=(main,))
        return [ctx.add(right=(self.phi,)), ctx.add(left=(self.psi,))]


@dataclass(frozen=True)
class ImpR(RuleApp):
    phi: Formula
    psi: Formula
    name = "ImpR"

    def arity(self):
        return 1

    def premises(self, conclusion):
        from .formulas import Imp

        main = Imp(self.phi, self.psi)
        if main not in conclusion.right:
            raise RuleMismatch(f"{main} must occur on the right")
        ctx = conclusion.remove(right=(main,))
        return [ctx.add(left=(self.phi,), right=(self.psi,))]


def _interp_premise(ordering, principal, i, diagonal):
    """Premise i of a modal rule: ordering positions < i contribute their
    antecedents, the principal contributes its succedent; with ``diagonal``
    the displayed formula's own boxing is added on the left."""
    psi_m, phi = principal
    psi_i = psi_m if i == len(ordering) else ordering[i][1]
    phis = [pair[0] for pair in ordering[:i]]
    right = mset(phis + [phi])
    left_boxes = list(right)
    if diagonal:
        left_boxes.append(psi_i)
    return Sequent((psi_i,) + interp_bot(left_boxes), right)


@dataclass(frozen=True)
class _InterpBase(RuleApp):
    ordering: Tuple[FPair, ...]
    principal: FPair
    weak_left: Tuple[Formula, ...] = ()
    weak_right: Tuple[Formula, ...] = ()

    diagonal = False

    def arity(self):
        return len(self.ordering) + 1

    def conclusion(self) -> Sequent:
        left = [Interp(a, b) for a, b in self.ordering] + list(self.weak_left)
        right = [Interp(*self.principal)] + list(self.weak_right)
        return Sequent(left, right)

    def premises(self, conclusion):
        if conclusion != self.conclusion():
            raise RuleMismatch(
                f"conclusion {conclusion} does not match rule data {self.conclusion()}"
            )
        m = len(self.ordering)
        return [
            _interp_premise(self.ordering, self.principal, i, self.diagonal)
            for i in range(m, -1, -1)
        ]


@dataclass(frozen=True)
class InterpIL(_InterpBase):
    name = "InterpIL"
    diagonal = True


@dataclass(frozen=True)
class InterpIK4(_InterpBase):
    name = "InterpIK4"
    progressing = True


@dataclass(frozen=True)
class InterpIK4Slim(_InterpBase):
    name = "InterpIK4Slim"
    progressing = True

    def premises(self, conclusion):
        antecedents = [a for a, _ in self.ordering]
        if len(set(antecedents)) != len(antecedents):
            raise RuleMismatch("slim rule requires pairwise distinct antecedents")
        return super().premises(conclusion)


@dataclass(frozen=True)
class Cut(RuleApp):
    chi: Formula
    name = "Cut"

    def arity(self):
        return 2

    def premises(self, conclusion):
        return [
            conclusion.add(right=(self.chi,)),
            conclusion.add(left=(self.chi,)),
        ]


@dataclass(frozen=True)
class Wk(RuleApp):
    add_left: Tuple[Formula, ...] = ()
    add_right: Tuple[Formula, ...] = ()
    name = "Wk"

    def arity(self):
        return 1

    def premises(self, conclusion):
        try:
            return [conclusion.remove(left=self.add_left, right=self.add_right)]
        except ValueError as exc:
            raise RuleMismatch(str(exc))


@dataclass(frozen=True)
class Ctr(RuleApp):
    dup_left: Tuple[Formula, ...] = ()
    dup_right: Tuple[Formula, ...] = ()
    name = "Ctr"

    def arity(self):
        return 1

    def premises(self, conclusion):
        if mset_sub(conclusion.left, self.dup_left) is None or mset_sub(
            conclusion.right, self.dup_right
        ) is None:
            raise RuleMismatch("contracted formulas must appear in the conclusion")
        return [conclusion.add(left=self.dup_left, right=self.dup_right)]


@dataclass(frozen=True)
class Equiv(RuleApp):
    """Replace one formula by a provably equivalent one.

    ``certificate`` is a Hilbert-style proof object of the biconditional
    ``premise_formula <-> conclusion_formula``; the proof checker validates
    it, so no proof search is needed to check an application.
    """

    premise_formula: Formula
    conclusion_formula: Formula
    side: str = "left"
    certificate: object = field(default=None, compare=False)
    name = "Equiv"

    def arity(self):
        return 1

    def premises(self, conclusion):
        if self.side not in ("left", "right"):
            raise RuleMismatch("side must be 'left' or 'right'")
        if self.side == "left":
            if self.conclusion_formula not in conclusion.left:
                raise RuleMismatch("replaced formula missing from the left")
            return [
                conclusion.remove(left=(self.conclusion_formula,)).add(
                    left=(self.premise_formula,)
                )
            ]
        if self.conclusion_formula not in conclusion.right:
            raise RuleMismatch("replaced formula missing from the right")
        return [
            conclusion.remove(right=(self.conclusion_formula,)).add(
                right=(self.premise_formula,)
            )
        ]


@dataclass(frozen=True)
class Empty(RuleApp):
    """Closes the empty sequent; only interpolation templates admit it."""

    name = "Empty"

    def arity(self):
        return 0

    def premises(self, conclusion):
        if conclusion.left or conclusion.right:
            raise RuleMismatch("Empty applies to the empty sequent only")
        return []


@dataclass(frozen=True)
class Repeat(RuleApp):
    """Backlink leaf of a cyclic proof; the target lives on the node."""

    name = "Repeat"

    def arity(self):
        return 0

    def premises(self, conclusion):
        return []


@dataclass(frozen=True)
class Assumption(RuleApp):
    """Open leaf of a derivation fragment."""

    name = "Assumption"

    def arity(self):
        return 0

    def premises(self, conclusion):
        return []


def premises_of(rule: RuleApp, conclusion: Sequent):
    """Premises of a rule application, in checking order."""
    return rule.premises(conclusion)


class CalculusId(Enum):
    FGIL = "fgil"
    FGIL_CUT = "fgil-cut"
    GIL = "gil"
    GIL_CUT = "gil-cut"
    GIL_SLIM = "gil-slim"
    AUX_GIL = "aux-gil"


_COMMON = (Ax, BotL, BotR, ImpL, ImpR)

_ADMITTED = {
    CalculusId.FGIL: _COMMON + (InterpIL,),
    CalculusId.FGIL_CUT: _COMMON + (InterpIL, Cut),
    CalculusId.GIL: _COMMON + (InterpIK4, InterpIK4Slim),
    CalculusId.GIL_CUT: _COMMON + (InterpIK4, InterpIK4Slim, Cut),
    CalculusId.GIL_SLIM: _COMMON + (InterpIK4Slim,),
    CalculusId.AUX_GIL: _COMMON + (InterpIK4, InterpIK4Slim, Wk, Ctr, Equiv),
}


def admits(calculus: CalculusId, rule: RuleApp) -> bool:
    return isinstance(rule, _ADMITTED[calculus])
