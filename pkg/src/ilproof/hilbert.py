"""Hilbert-style proofs for the interpretability logics il and ilp.

A proof is a list of lines, each justified as a classical tautology, an
axiom instance, modus ponens, or necessitation.  The tautology oracle
evaluates the propositional skeleton of a formula by truth tables, treating
maximal ``|>``-subformulas as opaque atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

from .formulas import (
    And,
    ArityError,
    Bot,
    Box,
    Dia,
    BnecF,
    Formula,
    Iff,
    Imp,
    Interp,
    Neg,
    big_and,
    big_or,
    fmt,
)


class HilbertError(Exception):
    pass


class HilbertCheckError(HilbertError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ShapeMismatch(HilbertError):
    pass


# ---------------------------------------------------------------------------
# Axiom schemes
# ---------------------------------------------------------------------------

SCHEMES = {
    "K": 2,
    "Four": 1,
    "L": 1,
    "J1": 2,
    "J2": 3,
    "J3": 3,
    "J4": 2,
    "J5": 1,
    "P": 2,
}


def axiom_instance(scheme: str, args) -> Formula:
    args = tuple(args)
    if scheme not in SCHEMES:
        raise HilbertError(f"unknown axiom scheme {scheme!r}")
    if len(args) != SCHEMES[scheme]:
        raise ArityError(f"{scheme} expects {SCHEMES[scheme]} argument(s)")
    if scheme == "K":
        a, b = args
        return Imp(Box(Imp(a, b)), Imp(Box(a), Box(b)))
    if scheme == "Four":
        (a,) = args
        return Imp(Box(a), Box(Box(a)))
    if scheme == "L":
        (a,) = args
        return Imp(Box(Imp(Box(a), a)), Box(a))
    if scheme == "J1":
        a, b = args
        return Imp(Box(Imp(a, b)), Interp(a, b))
    if scheme == "J2":
        a, b, c = args
        return Imp(And(Interp(a, b), Interp(b, c)), Interp(a, c))
    if scheme == "J3":
        a, b, c = args
        return Imp(And(Interp(a, b), Interp(c, b)), Interp(Or_(a, c), b))
    if scheme == "J4":
        a, b = args
        return Imp(Interp(a, b), Imp(Dia(a), Dia(b)))
    if scheme == "J5":
        (a,) = args
        return Interp(Dia(a), a)
    # P: persistence, only available in ilp.
    a, b = args
    return Imp(Interp(a, b), Box(Interp(a, b)))


def Or_(a, b):
    from .formulas import Or

    return Or(a, b)


# ---------------------------------------------------------------------------
# Tautology oracle
# ---------------------------------------------------------------------------


def _skeleton_atoms(f: Formula, out):
    if f.kind in ("atom", "interp"):
        out.add(f)
    elif f.kind == "imp":
        _skeleton_atoms(f.left, out)
        _skeleton_atoms(f.right, out)


def _eval(f: Formula, val) -> bool:
    if f.kind == "bot":
        return False
    if f.kind in ("atom", "interp"):
        return val[f]
    return (not _eval(f.left, val)) or _eval(f.right, val)


@lru_cache(maxsize=65536)
def is_tautology(f: Formula) -> bool:
    """Truth-table validity of the propositional skeleton: ``|>``-subformulas
    are treated as opaque atoms."""
    atoms = set()
    _skeleton_atoms(f, atoms)
    atoms = sorted(atoms, key=lambda g: g.key)
    n = len(atoms)
    for bits in range(1 << n):
        val = {a: bool(bits >> i & 1) for i, a in enumerate(atoms)}
        if not _eval(f, val):
            return False
    return True


# ---------------------------------------------------------------------------
# Proof objects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Taut:
    kind = "taut"


@dataclass(frozen=True)
class AxiomJust:
    scheme: str
    args: Tuple[Formula, ...]
    kind = "axiom"


@dataclass(frozen=True)
class MP:
    imp: int
    arg: int
    kind = "mp"


@dataclass(frozen=True)
class Nec:
    source: int
    kind = "nec"


@dataclass(frozen=True)
class HilbertLine:
    formula: Formula
    just: object


@dataclass(frozen=True)
class HilbertProof:
    lines: Tuple[HilbertLine, ...]

    @property
    def theorem(self) -> Formula:
        return self.lines[-1].formula

    def __len__(self):
        return len(self.lines)


def check_hilbert(h: HilbertProof, logic: str = "il") -> None:
    """Validate every line; raises HilbertCheckError on the first bad one."""
    if logic not in ("il", "ilp"):
        raise HilbertError(f"unknown logic {logic!r}")
    if not h.lines:
        raise HilbertCheckError(0, "empty proof")
    for i, line in enumerate(h.lines):
        just = line.just
        if isinstance(just, Taut):
            if not is_tautology(line.formula):
                raise HilbertCheckError(i, f"{fmt(line.formula)} is not a tautology")
        elif isinstance(just, AxiomJust):
            if just.scheme == "P" and logic != "ilp":
                raise HilbertCheckError(i, "axiom P is only available in ilp")
            try:
                want = axiom_instance(just.scheme, just.args)
            except HilbertError as exc:
                raise HilbertCheckError(i, str(exc))
            if want != line.formula:
                raise HilbertCheckError(
                    i, f"axiom {just.scheme} instance mismatch: expected {fmt(want)}"
                )
        elif isinstance(just, MP):
            if not (0 <= just.imp < i and 0 <= just.arg < i):
                raise HilbertCheckError(i, "modus ponens must cite earlier lines")
            imp = h.lines[just.imp].formula
            arg = h.lines[just.arg].formula
            if imp != Imp(arg, line.formula):
                raise HilbertCheckError(i, "modus ponens lines do not match")
        elif isinstance(just, Nec):
            if not 0 <= just.source < i:
                raise HilbertCheckError(i, "necessitation must cite an earlier line")
            if line.formula != Box(h.lines[just.source].formula):
                raise HilbertCheckError(i, "necessitation conclusion must be the box")
        else:
            raise HilbertCheckError(i, f"unknown justification {just!r}")


class ProofBuilder:
    """Accumulates Hilbert lines, deduplicating repeated formulas."""

    def __init__(self):
        self.lines: List[HilbertLine] = []
        self.index = {}

    def _add(self, formula: Formula, just) -> int:
        existing = self.index.get(formula)
        if existing is not None:
            return existing
        self.lines.append(HilbertLine(formula, just))
        idx = len(self.lines) - 1
        self.index[formula] = idx
        return idx

    def absorb(self, proof: HilbertProof) -> int:
        """Append another proof's lines (re-indexing); returns the index of
        its theorem."""
        remap = {}
        for i, line in enumerate(proof.lines):
            just = line.just
            if isinstance(just, MP):
                just = MP(remap[just.imp], remap[just.arg])
            elif isinstance(just, Nec):
                just = Nec(remap[just.source])
            remap[i] = self._add(line.formula, just)
        return remap[len(proof.lines) - 1]

    def taut(self, f: Formula) -> int:
        if not is_tautology(f):
            raise HilbertError(f"internal: {fmt(f)} is not a tautology")
        return self._add(f, Taut())

    def axiom(self, scheme: str, *args: Formula) -> int:
        return self._add(axiom_instance(scheme, args), AxiomJust(scheme, tuple(args)))

    def mp(self, imp_idx: int, arg_idx: int) -> int:
        imp = self.lines[imp_idx].formula
        if not imp.is_imp() or imp.left != self.lines[arg_idx].formula:
            raise HilbertError("modus ponens shape mismatch")
        return self._add(imp.right, MP(imp_idx, arg_idx))

    def nec(self, idx: int) -> int:
        return self._add(Box(self.lines[idx].formula), Nec(idx))

    def derive(self, goal: Formula, *hyp_idxs: int) -> int:
        """Prove ``goal`` from already-proved hypotheses by one curried
        tautology line plus modus ponens."""
        imp = goal
        for idx in reversed(hyp_idxs):
            imp = Imp(self.lines[idx].formula, imp)
        cur = self.taut(imp)
        for idx in hyp_idxs:
            cur = self.mp(cur, idx)
        return cur

    def proof(self) -> HilbertProof:
        return HilbertProof(tuple(self.lines))

    def conclude(self, idx: int) -> HilbertProof:
        """Proof whose last line is line ``idx`` (re-stating it if the
        deduplication left later lines behind)."""
        if idx == len(self.lines) - 1:
            return self.proof()
        line = self.lines[idx]
        return HilbertProof(tuple(self.lines) + (line,))

    # -- basic derived facts ------------------------------------------------

    def imp_to_interp(self, idx: int) -> int:
        """From a proof of a -> b conclude a |> b (necessitation + J1)."""
        f = self.lines[idx].formula
        if not f.is_imp():
            raise ShapeMismatch("imp_to_interp needs an implication")
        boxed = self.nec(idx)
        j1 = self.axiom("J1", f.left, f.right)
        return self.mp(j1, boxed)

    def interp_of_taut(self, a: Formula, b: Formula) -> int:
        return self.imp_to_interp(self.taut(Imp(a, b)))

    def chain(self, ab_idx: int, bc_idx: int) -> int:
        """From a |> b and b |> c conclude a |> c via J2."""
        ab = self.lines[ab_idx].formula
        bc = self.lines[bc_idx].formula
        if not (ab.is_interp() and bc.is_interp() and ab.right == bc.left):
            raise ShapeMismatch("chain needs composable |>-facts")
        j2 = self.axiom("J2", ab.left, ab.right, bc.right)
        return self.derive(Interp(ab.left, bc.right), j2, ab_idx, bc_idx)

    def join(self, ab_idx: int, cb_idx: int) -> int:
        """From a |> b and c |> b conclude (a | c) |> b via J3."""
        ab = self.lines[ab_idx].formula
        cb = self.lines[cb_idx].formula
        if not (ab.is_interp() and cb.is_interp() and ab.right == cb.right):
            raise ShapeMismatch("join needs |>-facts with equal succedents")
        j3 = self.axiom("J3", ab.left, ab.right, cb.left)
        return self.derive(Interp(Or_(ab.left, cb.left), ab.right), j3, ab_idx, cb_idx)


# ---------------------------------------------------------------------------
# Derived facts of il
# ---------------------------------------------------------------------------


def lob_rule_shape(psi: Formula, sigma) -> Formula:
    """The required premise shape for the internal Löb rule."""
    sigma = list(sigma)
    return Imp(
        And(psi, big_and([Interp(s, Bot) for s in sigma])),
        big_or(sigma),
    )


def _lob_rule(b: ProofBuilder, hyp_idx: int, psi: Formula, sigma) -> int:
    """From psi & /\\(sigma |> F) -> \\/sigma derive psi |> \\/sigma."""
    sigma = list(sigma)
    if not sigma:
        raise ShapeMismatch("the Löb rule needs a nonempty succedent family")
    if b.lines[hyp_idx].formula != lob_rule_shape(psi, sigma):
        raise ShapeMismatch("Löb rule premise has the wrong shape")
    disj = big_or(sigma)
    dias = [Dia(s) for s in sigma]
    widened = Or_(disj, big_or(dias))
    step_i = b.imp_to_interp(b.derive(Imp(psi, widened), hyp_idx))

    # For each member: (s | <>s) |> \/sigma.
    covers = []
    for s in sigma:
        j5 = b.axiom("J5", s)
        refl = b.interp_of_taut(s, s)
        cover = b.join(refl, j5)  # (s | <>s) |> s
        into = b.interp_of_taut(s, disj)
        covers.append(b.chain(cover, into))

    # Fold the covers with J3 into (\/(s | <>s)) |> \/sigma.
    acc = covers[-1]
    for idx in reversed(range(len(sigma) - 1)):
        acc = b.join(covers[idx], acc)

    bridged = b.interp_of_taut(widened, b.lines[acc].formula.left)
    step_ii = b.chain(bridged, acc)
    return b.chain(step_i, step_ii)


def _bnec_fix(b: ProofBuilder, phi: Formula) -> int:
    """Derive phi |> bnec(phi) from Löb's axiom."""
    nn = Neg(Neg(phi))
    a_form = Interp(nn, Bot)  # [] ~phi
    b_form = Interp(phi, Bot)
    d_form = Neg(Imp(a_form, Neg(phi)))
    bnec = BnecF(phi)

    lob = b.axiom("L", Neg(phi))  # (D |> F) -> ([] ~phi), unfolded

    # ~~phi |> F implies phi |> F, via J2 over the double-negation bridge.
    t_phi_nn = b.interp_of_taut(phi, nn)
    j2_b = b.axiom("J2", phi, nn, Bot)
    b_of_a = b.derive(Imp(a_form, b_form), j2_b, t_phi_nn)

    # (bnec phi |> F) -> (phi |> F).
    d_of_bnec = b.derive(Imp(d_form, bnec), b_of_a)
    d_interp_bnec = b.imp_to_interp(d_of_bnec)
    j2_d = b.axiom("J2", d_form, bnec, Bot)
    dbot_of_bnecbot = b.derive(
        Imp(Interp(bnec, Bot), Interp(d_form, Bot)), j2_d, d_interp_bnec
    )
    bbot_of_bnecbot = b.derive(
        Imp(Interp(bnec, Bot), b_form), dbot_of_bnecbot, lob, b_of_a
    )

    # Add phi on both sides and close with the Löb rule.
    hyp = b.derive(lob_rule_shape(phi, [bnec]), bbot_of_bnecbot)
    return _lob_rule(b, hyp, phi, [bnec])


def derived_il(item: str, *args) -> HilbertProof:
    """Builders for the internal derived facts.

    - ``ImpToInterp`` from a proof of a -> b builds a proof of a |> b.
    - ``LobRule`` from a proof of psi & /\\(sigma |> F) -> \\/sigma (with the
      member list given explicitly) builds a proof of psi |> \\/sigma.
    - ``BnecFix`` builds a proof of phi |> ((phi |> F) & phi).
    """
    b = ProofBuilder()
    if item == "ImpToInterp":
        (proof,) = args
        idx = b.absorb(proof)
        if not b.lines[idx].formula.is_imp():
            raise ShapeMismatch("ImpToInterp needs a proof of an implication")
        return b.conclude(b.imp_to_interp(idx))
    if item == "LobRule":
        proof, psi, sigma = args
        idx = b.absorb(proof)
        return b.conclude(_lob_rule(b, idx, psi, list(sigma)))
    if item == "BnecFix":
        (phi,) = args
        return b.conclude(_bnec_fix(b, phi))
    raise HilbertError(f"unknown derived item {item!r}")
