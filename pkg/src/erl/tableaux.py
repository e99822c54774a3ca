"""Labelled tableaux proof search.

A branch (a constrained set of statements) holds signed labelled formulas
together with a constraint set and its saturation.  The calculus has 25
rules: 13 propositional/multiplicative and 12 modal ones.  Nine rules
introduce fresh label constants; eight rules carry a side condition on the
constraint closure and are (re-)instantiated whenever the closure grows.

The search loop runs iterative deepening on the number of fresh constants.
Within an attempt, a fair scheduler fires non-branching constant-free rules
first, then additive branching rules, then constant-introducing rules, and
multiplicative branching rules last, FIFO within each class except that a
branching instance whose children all close immediately is preferred.  A
branch closes by one of four conditions; a saturated open branch with a
trustworthy (budget-clean) closure goes to the Hintikka check and, on
success, yields a verified countermodel.  Outcomes are three-valued:
proved, refuted, or unknown with diagnostics.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .config import RunConfig, is_star
from .errors import StaleInstance
from .labels import (AgentEq, Closure, EPSILON, ResEq, fact_str, label,
                     label_str, lam, lmul, lsub, fresh_constant_name)
from .syntax import (And, Atom, Bot, Formula, Implies, Modal, Not, Or,
                     Signature, Star, Top, Unit, Wand, format_formula,
                     C, D, E, CDUAL, DDUAL, EDUAL)

T, F = "T", "F"


@dataclass(frozen=True)
class SignedFormula:
    sign: str
    formula: Formula
    label: tuple

    def text(self, unit: str = "e") -> str:
        return f"{self.sign} {format_formula(self.formula, unit)} : {label_str(self.label)}"


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    target: SignedFormula
    inst: tuple = ()
    branch_id: int = -1
    revision: int = -1

    def key(self):
        return (self.rule, self.target, self.inst)


# rule name by (sign, connective tag)
_TAG = {Unit: "I", Not: "not", And: "and", Or: "or", Implies: "imp",
        Star: "star", Wand: "wand"}
_MODAL_TAG = {C: "C", D: "D", E: "E", CDUAL: "Cd", DDUAL: "Dd", EDUAL: "Ed"}


def rule_for(sf: SignedFormula) -> str | None:
    phi = sf.formula
    if isinstance(phi, (Atom, Top, Bot)):
        return None
    if isinstance(phi, Unit):
        return "T_I" if sf.sign == T else None
    if isinstance(phi, Modal):
        return f"{sf.sign}_{_MODAL_TAG[phi.op]}"
    return f"{sf.sign}_{_TAG[type(phi)]}"


CONDITION_RULES = frozenset(
    ["F_star", "T_wand", "T_C", "F_D", "T_E", "F_Cd", "T_Dd", "F_Ed"])
FRESH_NEED = {"T_star": 2, "F_wand": 1, "F_C": 1, "T_D": 1, "F_E": 1,
              "T_Cd": 1, "F_Dd": 1, "T_Ed": 1}

# Scheduling classes.  Non-branching constant-free rules go first and the
# additive branching rules next.  The multiplicative branching rules are
# deferred until after the constant-introducing ones: their instances
# quantify over the closure domain, which the delta rules populate, and
# firing them on a skeletal domain duplicates all later work per split.
_PRIORITY = {}
for _r in ["T_I", "T_not", "F_not", "T_and", "F_or", "F_imp",
           "T_C", "F_Cd", "T_Dd", "F_D", "T_E", "F_Ed"]:
    _PRIORITY[_r] = 0
for _r in ["F_and", "T_or", "T_imp"]:
    _PRIORITY[_r] = 1
for _r in FRESH_NEED:
    _PRIORITY[_r] = 2
for _r in ["F_star", "T_wand"]:
    _PRIORITY[_r] = 3

_BRANCHING_CLASSES = (1, 3)
_N_CLASSES = 4


def condition_instances(rule: str, sf: SignedFormula, closure: Closure) -> list[tuple]:
    """Current instantiations of a condition-bearing rule, one tuple each."""
    phi, x = sf.formula, sf.label
    if rule == "F_star":
        return [(y, z) for (y, z) in closure.splits(x)]
    if rule == "T_wand":
        out = []
        for w in closure.domain():
            y = lsub(w, x)
            if y is not None:
                out.append((y,))
        return out
    lam_t = lam(phi.term)
    u = phi.agent
    if rule in ("T_C", "F_Cd"):
        return [(y,) for y in closure.partners_agent(u, lmul(x, lam_t))]
    if rule in ("F_D", "T_Dd"):
        return [(lmul(y, lam_t),)
                for y in closure.partners_agent(u, x, suffix=lam_t)]
    if rule in ("T_E", "F_Ed"):
        xl = lmul(x, lam_t)
        return [(lmul(y, lam_t),)
                for y in closure.partners_agent(u, xl, suffix=lam_t)]
    raise ValueError(f"{rule} has no side condition")


def expand(rule: str, sf: SignedFormula, inst: tuple, fresh: list[str]):
    """Children produced by a rule application: a list of
    (new signed formulas, new constraints) pairs."""
    phi, x = sf.formula, sf.label

    def sfm(sign, f, lab):
        return SignedFormula(sign, f, lab)

    if rule == "T_I":
        return [([], [ResEq(x, EPSILON)])]
    if rule == "T_not":
        return [([sfm(F, phi.body, x)], [])]
    if rule == "F_not":
        return [([sfm(T, phi.body, x)], [])]
    if rule == "T_and":
        return [([sfm(T, phi.left, x), sfm(T, phi.right, x)], [])]
    if rule == "F_and":
        return [([sfm(F, phi.left, x)], []), ([sfm(F, phi.right, x)], [])]
    if rule == "T_or":
        return [([sfm(T, phi.left, x)], []), ([sfm(T, phi.right, x)], [])]
    if rule == "F_or":
        return [([sfm(F, phi.left, x), sfm(F, phi.right, x)], [])]
    if rule == "T_imp":
        return [([sfm(F, phi.left, x)], []), ([sfm(T, phi.right, x)], [])]
    if rule == "F_imp":
        return [([sfm(T, phi.left, x), sfm(F, phi.right, x)], [])]
    if rule == "T_star":
        a, b = (label(fresh[0]), label(fresh[1]))
        return [([sfm(T, phi.left, a), sfm(T, phi.right, b)],
                 [ResEq(x, lmul(a, b))])]
    if rule == "F_star":
        y, z = inst
        return [([sfm(F, phi.left, y)], []), ([sfm(F, phi.right, z)], [])]
    if rule == "T_wand":
        (y,) = inst
        return [([sfm(F, phi.left, y)], []), ([sfm(T, phi.right, lmul(x, y))], [])]
    if rule == "F_wand":
        a = label(fresh[0])
        xa = lmul(x, a)
        return [([sfm(T, phi.left, a), sfm(F, phi.right, xa)], [ResEq(xa, xa)])]

    lam_t = lam(phi.term)
    u = phi.agent
    if rule == "T_C":
        (y,) = inst
        return [([sfm(T, phi.body, y)], [])]
    if rule == "F_C":
        a = label(fresh[0])
        return [([sfm(F, phi.body, a)], [AgentEq(u, lmul(x, lam_t), a)])]
    if rule == "T_D":
        al = lmul(label(fresh[0]), lam_t)
        return [([sfm(T, phi.body, al)], [AgentEq(u, x, al)])]
    if rule == "F_D":
        (p,) = inst
        return [([sfm(F, phi.body, p)], [])]
    if rule == "T_E":
        (p,) = inst
        return [([sfm(T, phi.body, p)], [])]
    if rule == "F_E":
        al = lmul(label(fresh[0]), lam_t)
        return [([sfm(F, phi.body, al)], [AgentEq(u, lmul(x, lam_t), al)])]
    if rule == "T_Cd":
        a = label(fresh[0])
        return [([sfm(T, phi.body, a)], [AgentEq(u, lmul(x, lam_t), a)])]
    if rule == "F_Cd":
        (y,) = inst
        return [([sfm(F, phi.body, y)], [])]
    if rule == "T_Dd":
        (p,) = inst
        return [([sfm(T, phi.body, p)], [])]
    if rule == "F_Dd":
        al = lmul(label(fresh[0]), lam_t)
        return [([sfm(F, phi.body, al)], [AgentEq(u, x, al)])]
    if rule == "T_Ed":
        al = lmul(label(fresh[0]), lam_t)
        return [([sfm(T, phi.body, al)], [AgentEq(u, lmul(x, lam_t), al)])]
    if rule == "F_Ed":
        (p,) = inst
        return [([sfm(F, phi.body, p)], [])]
    raise ValueError(f"unknown rule {rule}")


def condition_fact(rule: str, sf: SignedFormula, inst: tuple):
    """The closure fact licensing a condition-rule instance."""
    phi, x = sf.formula, sf.label
    if rule == "F_star":
        return ("r", x, lmul(*inst))
    if rule == "T_wand":
        xy = lmul(x, inst[0])
        return ("r", xy, xy)
    lam_t = lam(phi.term)
    u = phi.agent
    if rule in ("T_C", "F_Cd"):
        return ("a", u, lmul(x, lam_t), inst[0])
    if rule in ("F_D", "T_Dd"):
        return ("a", u, x, inst[0])
    if rule in ("T_E", "F_Ed"):
        return ("a", u, lmul(x, lam_t), inst[0])
    raise ValueError(f"{rule} has no side condition")


# ---------------------------------------------------------------------------
# Branches


class Branch:
    """One CSS: signed formulas, constraints, cached closure, scheduler state."""

    def __init__(self, bid: int, closure: Closure):
        self.id = bid
        self.revision = 0
        self.formulas: set[SignedFormula] = set()
        self.t_labels: dict[Formula, set] = {}
        self.f_labels: dict[Formula, set] = {}
        self.constraints: list = list(closure.base)
        self.closure = closure
        self.queues = tuple(deque() for _ in range(_N_CLASSES))
        self.queued: set = set()
        self.done: set = set()
        self.cond_sfs: list[tuple[str, SignedFormula]] = []
        self.closed: tuple | None = None
        self.starved = False
        self.hintikka_state: str | None = None

    # -- growth --------------------------------------------------------------

    def add_signed(self, sf: SignedFormula, rng=None) -> None:
        if sf in self.formulas:
            return
        assert self.closure.in_domain(sf.label), "label outside closure domain"
        self.formulas.add(sf)
        self.revision += 1
        store = self.t_labels if sf.sign == T else self.f_labels
        store.setdefault(sf.formula, set()).add(sf.label)
        if self.closed is None:
            self._check_new_formula(sf)
        rule = rule_for(sf)
        if rule is None:
            return
        if rule in CONDITION_RULES:
            self.cond_sfs.append((rule, sf))
            self._enqueue_batch(
                [RuleInstance(rule, sf, i) for i in
                 condition_instances(rule, sf, self.closure)], rng)
        else:
            self._enqueue_batch([RuleInstance(rule, sf)], rng)

    def add_constraints(self, constraints: Iterable, rng=None) -> None:
        before = len(self.closure)
        cs = list(constraints)
        if not cs:
            return
        self.constraints.extend(cs)
        self.closure.add(*cs)
        self.revision += 1
        if len(self.closure) != before:
            self.refresh_conditions(rng)
            if self.closed is None:
                self.recheck_closed()

    def refresh_conditions(self, rng=None) -> None:
        for (rule, sf) in self.cond_sfs:
            self._enqueue_batch(
                [RuleInstance(rule, sf, i) for i in
                 condition_instances(rule, sf, self.closure)], rng)

    def _enqueue_batch(self, instances: list, rng=None) -> None:
        fresh = [ri for ri in instances
                 if ri.key() not in self.done and ri.key() not in self.queued]
        if rng is not None:
            rng.shuffle(fresh)
        for ri in fresh:
            self.queued.add(ri.key())
            self.queues[_PRIORITY[ri.rule]].append(ri)

    # -- closure conditions ----------------------------------------------------

    def _check_new_formula(self, sf: SignedFormula) -> None:
        phi, x = sf.formula, sf.label
        if sf.sign == F and isinstance(phi, Top):
            self.closed = ("F_top", sf)
            return
        if sf.sign == T and isinstance(phi, Bot):
            self.closed = ("T_bot", sf)
            return
        if sf.sign == F and isinstance(phi, Unit) and self.closure.has_res(x, EPSILON):
            self.closed = ("F_I", sf)
            return
        other = self.f_labels if sf.sign == T else self.t_labels
        for y in other.get(phi, ()):
            a, b = (x, y) if sf.sign == T else (y, x)
            if self.closure.has_res(a, b):
                self.closed = ("clash", phi, a, b)
                return

    def recheck_closed(self) -> None:
        for phi, xs in self.t_labels.items():
            ys = self.f_labels.get(phi)
            if not ys:
                continue
            for x in xs:
                for y in ys:
                    if self.closure.has_res(x, y):
                        self.closed = ("clash", phi, x, y)
                        return
        for phi, xs in self.f_labels.items():
            if isinstance(phi, Unit):
                for x in xs:
                    if self.closure.has_res(x, EPSILON):
                        self.closed = ("F_I", SignedFormula(F, phi, x))
                        return
            if isinstance(phi, Top):
                for x in xs:
                    self.closed = ("F_top", SignedFormula(F, phi, x))
                    return
        for phi, xs in self.t_labels.items():
            if isinstance(phi, Bot):
                for x in xs:
                    self.closed = ("T_bot", SignedFormula(T, phi, x))
                    return

    # -- scheduler -------------------------------------------------------------

    def has_work(self) -> bool:
        return any(self.queues)

    def pop(self) -> RuleInstance | None:
        for cls, q in enumerate(self.queues):
            while q:
                if cls in _BRANCHING_CLASSES:
                    ri = self._pop_branching(q)
                else:
                    ri = q.popleft()
                self.queued.discard(ri.key())
                if ri.key() not in self.done:
                    return ri
        return None

    def _pop_branching(self, q) -> RuleInstance:
        """Prefer the instance whose children close immediately (all of them,
        else as many as possible); fall back to FIFO order."""
        best_i, best_score = 0, -1
        for i, ri in enumerate(q):
            if ri.key() in self.done:
                continue
            spec = expand(ri.rule, ri.target, ri.inst, [])
            score = sum(1 for (sfs, _) in spec
                        if any(self._would_close(sf) for sf in sfs))
            if score == len(spec):
                best_i = i
                break
            if score > best_score:
                best_i, best_score = i, score
        ri = q[best_i]
        del q[best_i]
        return ri

    def _would_close(self, sf: SignedFormula) -> bool:
        phi, x = sf.formula, sf.label
        if sf.sign == F and isinstance(phi, Top):
            return True
        if sf.sign == T and isinstance(phi, Bot):
            return True
        if sf.sign == F and isinstance(phi, Unit) and self.closure.has_res(x, EPSILON):
            return True
        other = self.f_labels if sf.sign == T else self.t_labels
        for y in other.get(phi, ()):
            a, b = (x, y) if sf.sign == T else (y, x)
            if self.closure.has_res(a, b):
                return True
        return False

    def pending(self) -> list:
        out = []
        for q in self.queues:
            out.extend(ri for ri in q if ri.key() not in self.done)
        return out

    def clone(self, bid: int) -> "Branch":
        other = Branch.__new__(Branch)
        other.id = bid
        other.revision = 0
        other.formulas = set(self.formulas)
        other.t_labels = {k: set(v) for k, v in self.t_labels.items()}
        other.f_labels = {k: set(v) for k, v in self.f_labels.items()}
        other.constraints = list(self.constraints)
        other.closure = self.closure.clone()
        other.queues = tuple(deque(q) for q in self.queues)
        other.queued = set(self.queued)
        other.done = set(self.done)
        other.cond_sfs = list(self.cond_sfs)
        other.closed = self.closed
        other.starved = self.starved
        other.hintikka_state = self.hintikka_state
        return other

    def snapshot(self, unit: str = "e") -> dict:
        return {
            "formulas": sorted(sf.text(unit) for sf in self.formulas),
            "constraints": [str(c) for c in self.constraints],
            "closed": None if self.closed is None else describe_closure_witness(self.closed, unit),
        }


def describe_closure_witness(witness: tuple, unit: str = "e") -> dict:
    kind = witness[0]
    if kind == "clash":
        _, phi, x, y = witness
        return {"condition": 1, "formula": format_formula(phi, unit),
                "labels": [label_str(x), label_str(y)]}
    if kind == "F_I":
        return {"condition": 2, "label": label_str(witness[1].label)}
    if kind == "F_top":
        return {"condition": 3, "label": label_str(witness[1].label)}
    return {"condition": 4, "label": label_str(witness[1].label)}


def is_closed_branch(branch: Branch) -> tuple[bool, tuple | None]:
    """Closure-condition check with witness (condition 1-4)."""
    if branch.closed is None:
        branch.recheck_closed()
    return (branch.closed is not None, branch.closed)


# ---------------------------------------------------------------------------
# Tableau


@dataclass
class ProofOutcome:
    verdict: str                      # "proved" | "refuted" | "unknown"
    applications: int = 0
    depth: int = 0
    trace: list = field(default_factory=list)
    closed_branches: list = field(default_factory=list)
    countermodel: object = None
    world: str | None = None
    branch: dict | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def proved(self):
        return self.verdict == "proved"

    @property
    def refuted(self):
        return self.verdict == "refuted"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "applications": self.applications,
               "depth": self.depth, "trace": self.trace,
               "closed_branches": self.closed_branches,
               "diagnostics": self.diagnostics}
        if self.countermodel is not None:
            from .models import model_to_json
            out["countermodel"] = model_to_json(self.countermodel, self.world)
            out["world"] = self.world
            out["branch"] = self.branch
        return out


class Tableau:
    def __init__(self, phi: Formula, sig: Signature, logic: str = "erl",
                 closure_max_card: int | None = 6, closure_max_facts: int = 200_000,
                 constant_limit: int | None = None, seed: int = 0):
        self.sig = sig
        self.logic = logic
        self.phi = phi
        self.closure_max_card = closure_max_card
        self.closure_max_facts = closure_max_facts
        self.constant_limit = constant_limit  # fresh constants beyond c1
        self.used_constants = 1               # c1 is consumed by the root
        self.next_branch_id = 0
        self.trace: list = []
        self.closed_log: list = []
        self.applications = 0
        self.rng = random.Random(seed) if seed else None
        closure = Closure(sorted(sig.agents), erl_star=is_star(logic),
                          max_card=closure_max_card, max_facts=closure_max_facts)
        root = Branch(self._new_id(), closure)
        c1 = label(fresh_constant_name(1))
        root.add_constraints([ResEq(c1, c1)], self.rng)
        root.add_signed(SignedFormula(F, phi, c1), self.rng)
        self.branches: list[Branch] = [root]

    def _new_id(self) -> int:
        bid = self.next_branch_id
        self.next_branch_id += 1
        return bid

    def fresh_constant(self) -> str:
        """Allocate the next label constant (never reused, never a lambda)."""
        self.used_constants += 1
        return fresh_constant_name(self.used_constants)

    def can_afford(self, rule: str) -> bool:
        need = FRESH_NEED.get(rule, 0)
        if need == 0 or self.constant_limit is None:
            return True
        return (self.used_constants - 1) + need <= self.constant_limit

    def applicable_rules(self, branch_index: int) -> list[RuleInstance]:
        b = self.branches[branch_index]
        return [RuleInstance(ri.rule, ri.target, ri.inst, b.id, b.revision)
                for ri in b.pending()]

    def apply_rule(self, branch_index: int, ri: RuleInstance) -> list[int]:
        """Public single-step application; raises StaleInstance when the
        branch has changed since the instance was enumerated."""
        b = self.branches[branch_index]
        if ri.branch_id >= 0 and (ri.branch_id != b.id or ri.revision != b.revision):
            raise StaleInstance(f"branch {ri.branch_id}@{ri.revision} is gone")
        return self._apply(branch_index, ri)

    def _apply(self, branch_index: int, ri: RuleInstance) -> list[int]:
        b = self.branches[branch_index]
        key = ri.key()
        if key in b.done:
            return [b.id]
        b.done.add(key)
        fresh = [self.fresh_constant() for _ in range(FRESH_NEED.get(ri.rule, 0))]
        children_spec = expand(ri.rule, ri.target, ri.inst, fresh)
        # the leftmost child continues the parent branch; siblings are clones
        children = [b] + [b.clone(self._new_id()) for _ in children_spec[1:]]
        added = {}
        entry = {
            "step": self.applications,
            "branch": b.id,
            "rule": ri.rule,
            "principal": ri.target.text(self.sig.unit),
            "instantiation": [label_str(x) for x in ri.inst],
            "fresh": fresh,
        }
        if ri.rule in CONDITION_RULES:
            fact = condition_fact(ri.rule, ri.target, ri.inst)
            entry["condition_fact"] = fact_str(fact)
            entry["condition_derivation"] = b.closure.derivation_chain(fact)
        for child, (sfs, constraints) in zip(children, children_spec):
            child.add_constraints(constraints, self.rng)
            for sf in sfs:
                child.add_signed(sf, self.rng)
            added[str(child.id)] = {
                "formulas": [sf.text(self.sig.unit) for sf in sfs],
                "constraints": [str(c) for c in constraints],
            }
        entry["children"] = [c.id for c in children]
        entry["added"] = added
        self.trace.append(entry)
        self.applications += 1
        self.branches[branch_index:branch_index + 1] = children
        for child in children:
            if child.closed is not None:
                rec = {"branch": child.id,
                       "witness": describe_closure_witness(child.closed, self.sig.unit)}
                if child.closed[0] == "clash":
                    _, _, x, y = child.closed
                    rec["fact_derivation"] = child.closure.derivation_chain(("r", x, y))
                elif child.closed[0] == "F_I":
                    x = child.closed[1].label
                    rec["fact_derivation"] = child.closure.derivation_chain(("r", x, EPSILON))
                self.closed_log.append(rec)
        return [c.id for c in children]


def init_tableau(phi: Formula, sig: Signature, logic: str = "erl",
                 closure_max_card: int | None = 6, seed: int = 0) -> Tableau:
    return Tableau(phi, sig, logic, closure_max_card=closure_max_card, seed=seed)


# ---------------------------------------------------------------------------
# Proof search


def prove(phi: Formula, sig: Signature, config: RunConfig | None = None) -> ProofOutcome:
    """Three-valued proof search: iterative deepening on fresh constants,
    fair scheduling inside each attempt, verified countermodels on refutation."""
    config = config or RunConfig()
    budget = config.budget
    depths = list(range(1, budget.max_constants + 1)) if budget.max_constants > 0 \
        else [0]
    last = None
    for depth in depths:
        # Shallow attempts abort as soon as the constant budget bites: any
        # proof or saturated open branch reachable at this depth is still
        # reachable at a deeper one, so only the last attempt runs to
        # quiescence.
        outcome = _attempt(phi, sig, config, depth,
                           abort_on_starve=depth != depths[-1])
        outcome.depth = depth
        if outcome.verdict in ("proved", "refuted"):
            return outcome
        last = outcome
        if not outcome.diagnostics.get("starved"):
            return outcome
        if outcome.diagnostics.get("steps_exhausted"):
            return outcome
    return last


def _attempt(phi: Formula, sig: Signature, config: RunConfig, depth: int,
             abort_on_starve: bool = False) -> ProofOutcome:
    t = Tableau(phi, sig, config.logic,
                closure_max_card=config.budget.closure_max_card,
                closure_max_facts=config.budget.closure_max_facts,
                constant_limit=depth, seed=config.seed)
    if config.workers > 1:
        return _run_parallel(t, config, abort_on_starve)
    return _run_sequential(t, config, abort_on_starve)


def _run_sequential(t: Tableau, config: RunConfig,
                    abort_on_starve: bool = False) -> ProofOutcome:
    max_steps = config.budget.max_steps
    refutation = None
    steps_exhausted = False
    while True:
        target = None
        for idx, b in enumerate(t.branches):
            if b.closed is not None:
                continue
            if b.has_work():
                target = idx
                break
            if b.hintikka_state is None:
                refutation = _saturated(t, b, config)
                if refutation is not None:
                    return refutation
        if target is None:
            break
        if t.applications >= max_steps:
            steps_exhausted = True
            break
        b = t.branches[target]
        ri = b.pop()
        if ri is None:
            continue
        if not t.can_afford(ri.rule):
            b.starved = True
            if abort_on_starve:
                break
            continue
        t._apply(target, ri)
    return _aggregate(t, steps_exhausted)


def _saturated(t: Tableau, b: Branch, config: RunConfig) -> ProofOutcome | None:
    """Handle a branch with no pending work: mark it, or extract and verify
    a countermodel when it is a trustworthy Hintikka branch."""
    if b.starved:
        b.hintikka_state = "starved"
        return None
    if b.closure.budget_hit:
        b.hintikka_state = "closure-budget"
        return None
    from . import hintikka
    verdict = hintikka.is_hintikka(b.formulas, b.closure, t.sig)
    if verdict is not None:
        b.hintikka_state = f"violated({verdict[0]})"
        return None
    model, world, warnings = hintikka.extract_model(
        b.formulas, b.closure, t.sig, designated=label(fresh_constant_name(1)))
    failure = hintikka.verify_extraction(model, b.formulas, b.closure, t.sig,
                                         logic=t.logic)
    if failure is not None:
        b.hintikka_state = f"extraction-failed: {failure}"
        return None
    b.hintikka_state = "hintikka"
    return ProofOutcome("refuted", applications=t.applications,
                        trace=t.trace, closed_branches=t.closed_log,
                        countermodel=model, world=world,
                        branch=b.snapshot(t.sig.unit),
                        diagnostics={"warnings": warnings} if warnings else {})


def _aggregate(t: Tableau, steps_exhausted: bool) -> ProofOutcome:
    open_states = [b.hintikka_state or "open" for b in t.branches if b.closed is None]
    if not open_states and not steps_exhausted:
        return ProofOutcome("proved", applications=t.applications,
                            trace=t.trace, closed_branches=t.closed_log)
    diagnostics = {
        "open_branches": len(open_states),
        "branch_states": sorted(set(open_states)),
        "starved": any(b.starved for b in t.branches if b.closed is None),
        "closure_budget_hit": any(b.closure.budget_hit for b in t.branches
                                  if b.closed is None),
    }
    if steps_exhausted:
        diagnostics["steps_exhausted"] = True
    return ProofOutcome("unknown", applications=t.applications,
                        trace=t.trace, closed_branches=t.closed_log,
                        diagnostics=diagnostics)


def _run_parallel(t: Tableau, config: RunConfig,
                  abort_on_starve: bool = False) -> ProofOutcome:
    """Branch-level concurrency: each worker owns one branch at a time and
    expands it to a terminal state; children split off as new tasks.  The
    first verified countermodel wins; proved requires every branch closed.
    Trace order may differ from the sequential run, verdicts may not."""
    import threading
    from concurrent.futures import ThreadPoolExecutor, wait, FIRST_COMPLETED

    lock = threading.Lock()
    stop = threading.Event()
    result: list[ProofOutcome] = []
    steps_flag: list[bool] = []
    max_steps = config.budget.max_steps

    def work(b):
        spawned = []
        while not stop.is_set():
            if b.closed is not None:
                return spawned
            ri = b.pop()
            if ri is None:
                with lock:
                    if not stop.is_set():
                        refut = _saturated(t, b, config)
                        if refut is not None:
                            result.append(refut)
                            stop.set()
                return spawned
            if not t.can_afford(ri.rule):
                b.starved = True
                if abort_on_starve:
                    stop.set()
                    return spawned
                continue
            with lock:
                if t.applications >= max_steps:
                    steps_flag.append(True)
                    stop.set()
                    return spawned
                pos = next(i for i, br in enumerate(t.branches) if br is b)
                child_ids = t._apply(pos, ri)
                by_id = {br.id: br for br in t.branches}
                spawned.extend(by_id[cid] for cid in child_ids[1:])
        return spawned

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = {pool.submit(work, b) for b in t.branches}
        while futures:
            done, futures = wait(futures, return_when=FIRST_COMPLETED)
            for fut in done:
                for nb in fut.result():
                    futures.add(pool.submit(work, nb))
    if result:
        return result[0]
    return _aggregate(t, bool(steps_flag))
