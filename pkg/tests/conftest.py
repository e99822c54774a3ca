import random

import pytest

from erl import Signature


@pytest.fixture
def sig_bbi():
    """Agent-free signature: the Boolean-BI fragment."""
    return Signature.make([], ["e"])


@pytest.fixture
def sig_a():
    return Signature.make(["a"], ["e", "r", "s"])


@pytest.fixture
def sig_st():
    return Signature.make(["a"], ["e", "s", "t"])


def random_formula(rng: random.Random, sig: Signature, depth: int,
                   atoms=("p", "q"), with_duals=True):
    from erl import (And, Atom, Bot, Implies, Modal, Not, Or, Star, Top,
                     Unit, Wand, C, D, E, CDUAL, DDUAL, EDUAL, term_of)
    leaves = ["atom", "atom", "I", "top", "bot"]
    inner = ["not", "and", "or", "imp", "star", "wand",
             "C", "D", "E"]
    if with_duals:
        inner += ["Cd", "Dd", "Ed", "Cd", "Dd", "Ed"]
    kind = rng.choice(inner + leaves) if depth > 0 else rng.choice(leaves)
    if kind == "atom":
        return Atom(rng.choice(atoms))
    if kind == "I":
        return Unit()
    if kind == "top":
        return Top()
    if kind == "bot":
        return Bot()
    if kind == "not":
        return Not(random_formula(rng, sig, depth - 1, atoms, with_duals))
    if kind in ("and", "or", "imp", "star", "wand"):
        cls = {"and": And, "or": Or, "imp": Implies, "star": Star,
               "wand": Wand}[kind]
        return cls(random_formula(rng, sig, depth - 1, atoms, with_duals),
                   random_formula(rng, sig, depth - 1, atoms, with_duals))
    op = {"C": C, "D": D, "E": E, "Cd": CDUAL, "Dd": DDUAL, "Ed": EDUAL}[kind]
    agent = rng.choice(sorted(sig.agents))
    non_unit = sorted(sig.resources - {sig.unit})
    pool = [[], *([r] for r in non_unit)]
    if non_unit:
        pool.append([non_unit[0], non_unit[0]])
    term = term_of(rng.choice(pool), sig)
    return Modal(op, agent, term, random_formula(rng, sig, depth - 1, atoms,
                                                 with_duals))
