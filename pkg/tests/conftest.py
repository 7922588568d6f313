import random

import pytest
from hypothesis import strategies as st

from ilproof.formulas import Atom, Bot, Formula, Imp, Interp
from ilproof.hilbert import SCHEMES, axiom_instance
from ilproof.sequents import Sequent

ATOMS = ("p", "q", "r")


def random_formula(rng: random.Random, budget: int, atoms=ATOMS) -> Formula:
    """A random formula of size at most ``budget``."""
    if budget < 3 or rng.random() < 0.3:
        if rng.random() < 0.15:
            return Bot
        return Atom(rng.choice(atoms))
    left_budget = rng.randint(1, budget - 2)
    left = random_formula(rng, left_budget, atoms)
    right = random_formula(rng, budget - 1 - left.size, atoms)
    op = Interp if rng.random() < 0.45 else Imp
    return op(left, right)


def random_sequent(rng: random.Random, budget: int, max_side=3, atoms=ATOMS) -> Sequent:
    left = [random_formula(rng, budget, atoms) for _ in range(rng.randint(0, max_side))]
    right = [random_formula(rng, budget, atoms) for _ in range(rng.randint(0, max_side))]
    return Sequent(left, right)


def random_provable(rng: random.Random, atoms=ATOMS) -> Formula:
    """A provable formula, built from axiom instances closed under a few
    random modus ponens compositions with tautological implications."""
    scheme = rng.choice(sorted(set(SCHEMES) - {"P"}))
    args = [random_formula(rng, 3, atoms) for _ in range(SCHEMES[scheme])]
    f = axiom_instance(scheme, args)
    if rng.random() < 0.4:
        from ilproof.formulas import Or

        f = Or(f, random_formula(rng, 3, atoms))
    return f


@st.composite
def formulas(draw, max_size=15, atoms=ATOMS):
    size = draw(st.integers(min_value=1, max_value=max_size))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_formula(random.Random(seed), size, atoms)


@pytest.fixture
def rng():
    return random.Random(20240817)
