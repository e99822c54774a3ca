"""Logical signature and formula layer.

A signature declares a finite set of agents, a finite set of resources with
a distinguished unit, and a partial commutative-associative composition on
resources.  Formulas combine the Boolean-BI connectives with six modalities,
each parametrized by an agent and a multiset of resources (the agent's local
resource).  Universal modalities are written with box brackets and
existential ones with angle brackets:

    [C a; t]   necessity over the agent's view of the ambient+local combination
    <C a; t>   its dual
    <D a; t>   possibility via a local-resource decomposition
    [D a; t]   its dual
    [E a; t]   necessity with the local resource kept on both sides
    <E a; t>   its dual

ASCII grammar (precedence: unary > * > & > | > (->, -*) right-assoc):

    formula := imp
    imp     := or (('->' | '-*') imp)?
    or      := and ('|' and)*
    and     := star ('&' star)*
    star    := unary ('*' unary)*
    unary   := '!' unary | MODAL unary | 'I' | 'top' | 'bot' | ATOM | '(' formula ')'
    MODAL   := ('[' | '<') ('C'|'D'|'E') AGENT ';' term (']' | '>')
    term    := NAME ('.' NAME)*

Atoms are identifiers; ``I``, ``top`` and ``bot`` are reserved.  Resource
terms are multisets: order is ignored and unit factors are dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import (ParseError, SignatureError, UnknownAgentError,
                     UnknownResourceError)

# Names of the form c<digits> are reserved for fresh label constants in the
# tableaux calculus; allowing them as resources would make labels ambiguous.
_RESERVED_NAME = re.compile(r"^c[0-9]+$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


# ---------------------------------------------------------------------------
# Signature


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    detail: str

    def __str__(self):
        return f"{self.axiom}{self.witness}: {self.detail}"


@dataclass(frozen=True)
class Signature:
    """Agents, resources, and the syntactic partial composition.

    ``composition`` maps canonically ordered pairs (min, max) of non-unit
    resource names to their product; unit rows are implicit.
    """

    agents: frozenset[str]
    resources: frozenset[str]
    unit: str = "e"
    composition: Mapping[tuple[str, str], str] = field(default_factory=dict)

    @staticmethod
    def make(agents: Iterable[str], resources: Iterable[str], unit: str = "e",
             composition: Iterable[tuple[str, str, str]] = ()) -> "Signature":
        """Build a signature, completing commuted orientations and dropping
        redundant unit rows.  Inconsistent duplicate rows raise."""
        table: dict[tuple[str, str], str] = {}
        res = frozenset(resources) | {unit}
        for (r, s, t) in composition:
            if unit in (r, s):
                other = s if r == unit else r
                if t != other:
                    raise SignatureError(f"unit row {r}.{s} must equal {other}, got {t}")
                continue
            key = (min(r, s), max(r, s))
            if table.get(key, t) != t:
                raise SignatureError(f"conflicting rows for {key}: {table[key]} vs {t}")
            table[key] = t
        return Signature(frozenset(agents), res, unit, table)

    def compose(self, r: str, s: str) -> str | None:
        if r == self.unit:
            return s
        if s == self.unit:
            return r
        return self.composition.get((min(r, s), max(r, s)))


def validate_signature(sig: Signature) -> list[Violation]:
    """Check the signature axioms; returns the first witness per violated
    axiom (empty list means the signature is well formed)."""
    out = []

    def bad_name(n):
        return not n or not _NAME.match(n)

    for n in sorted(sig.resources):
        if bad_name(n):
            out.append(Violation("Name", (n,), "resource names must be identifiers"))
            break
    for n in sorted(sig.agents):
        if bad_name(n):
            out.append(Violation("Name", (n,), "agent names must be identifiers"))
            break
    for n in sorted(sig.resources):
        if _RESERVED_NAME.match(n):
            out.append(Violation("ReservedName", (n,),
                                 "names c1, c2, ... are reserved for label constants"))
            break
    if sig.unit not in sig.resources:
        out.append(Violation("Unit", (sig.unit,), "unit must be a declared resource"))
    overlap = sorted(sig.agents & sig.resources)
    if overlap:
        out.append(Violation("Disjointness", (overlap[0],),
                             "agent and resource namespaces overlap"))

    names = sig.resources
    for (r, s), t in sorted(sig.composition.items()):
        if r not in names or s not in names or t not in names:
            out.append(Violation("Table", (r, s, t), "row mentions undeclared names"))
            break

    # Commutativity is canonical by construction when built through make();
    # still check raw mappings in case the table was supplied directly.
    for (r, s), t in sorted(sig.composition.items()):
        rev = sig.composition.get((s, r))
        if (s, r) != (r, s) and rev is not None and rev != t:
            out.append(Violation("Commutativity", (r, s), f"{t} vs {rev}"))
            break
        if (r, s) != (min(r, s), max(r, s)) and sig.composition.get((min(r, s), max(r, s))) is None:
            out.append(Violation("Commutativity", (r, s), "missing commuted orientation"))
            break

    # Kleene associativity: r.(s.t) defined forces (r.s).t defined and equal.
    done = False
    for r in sorted(names):
        if done:
            break
        for s in sorted(names):
            if done:
                break
            for t in sorted(names):
                st = sig.compose(s, t)
                if st is None:
                    continue
                r_st = sig.compose(r, st)
                if r_st is None:
                    continue
                rs = sig.compose(r, s)
                if rs is None or sig.compose(rs, t) != r_st:
                    out.append(Violation("Associativity", (r, s, t),
                                         f"{r}.({s}.{t}) = {r_st} but ({r}.{s}).{t} differs"))
                    done = True
                    break
    return out


def load_signature(source) -> Signature:
    """Load a signature from a JSON file path, file object, or dict."""
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    try:
        sig = Signature.make(
            data.get("agents", []),
            data["resources"],
            data.get("unit", "e"),
            [tuple(row) for row in data.get("composition", [])],
        )
    except KeyError as exc:
        raise SignatureError(f"signature file missing field {exc}") from exc
    violations = validate_signature(sig)
    if violations:
        raise SignatureError("invalid signature: " + "; ".join(map(str, violations)))
    return sig


def signature_to_json(sig: Signature) -> dict:
    return {
        "agents": sorted(sig.agents),
        "resources": sorted(sig.resources),
        "unit": sig.unit,
        "composition": [[r, s, t] for (r, s), t in sorted(sig.composition.items())],
    }


# ---------------------------------------------------------------------------
# Resource terms


@dataclass(frozen=True)
class Term:
    """A multiset of non-unit resource names; the empty term is the unit."""

    parts: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(sorted(self.parts)))

    @property
    def is_unit(self) -> bool:
        return not self.parts

    def text(self, unit: str = "e") -> str:
        return ".".join(self.parts) if self.parts else unit


def term_of(names: Iterable[str], sig: Signature) -> Term:
    parts = []
    for n in names:
        if n not in sig.resources:
            raise UnknownResourceError(n)
        if n != sig.unit:
            parts.append(n)
    return Term(tuple(parts))


# ---------------------------------------------------------------------------
# Formulas

C, D, E = "C", "D", "E"
CDUAL, DDUAL, EDUAL = "Cdual", "Ddual", "Edual"
MODAL_OPS = (C, D, E, CDUAL, DDUAL, EDUAL)
BASE_OF = {CDUAL: C, DDUAL: D, EDUAL: E}
DUAL_OF = {v: k for k, v in BASE_OF.items()}


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Unit(Formula):
    """The multiplicative unit I."""


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Star(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Wand(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Modal(Formula):
    op: str
    agent: str
    term: Term
    body: Formula

    def __post_init__(self):
        if self.op not in MODAL_OPS:
            raise ValueError(f"unknown modality {self.op!r}")


TOP = Top()
BOT = Bot()
UNIT = Unit()


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not):
        yield from subformulas(phi.body)
    elif isinstance(phi, (And, Or, Implies, Star, Wand)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, Modal):
        yield from subformulas(phi.body)


def atoms_of(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if isinstance(f, Atom)}


def expand_duals(phi: Formula) -> Formula:
    """Rewrite every dual modality into not-base-not form; no other change."""
    if isinstance(phi, Modal):
        body = expand_duals(phi.body)
        if phi.op in BASE_OF:
            return Not(Modal(BASE_OF[phi.op], phi.agent, phi.term, Not(body)))
        return Modal(phi.op, phi.agent, phi.term, body)
    if isinstance(phi, Not):
        return Not(expand_duals(phi.body))
    if isinstance(phi, (And, Or, Implies, Star, Wand)):
        return type(phi)(expand_duals(phi.left), expand_duals(phi.right))
    return phi


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(r"(->|-\*|[()\[\]<>;.!&|*]|[A-Za-z_][A-Za-z0-9_]*)")
_WS = re.compile(r"\s*")

_RESERVED = {"top", "bot", "I"}

# (bracket, letter) -> modality constructor tag
_MODAL_TAG = {
    ("[", "C"): C, ("[", "D"): DDUAL, ("[", "E"): E,
    ("<", "C"): CDUAL, ("<", "D"): D, ("<", "E"): EDUAL,
}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            pos = _WS.match(text, pos).end()
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            self.items.append((m.group(0), pos))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.items[self.i][0] if self.i < len(self.items) else None

    def pos(self) -> int:
        return self.items[self.i][1] if self.i < len(self.items) else len(self.text)

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, tok: str):
        got = self.peek()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}", self.pos())
        self.next()


def parse_formula(text: str, sig: Signature) -> Formula:
    toks = _Tokens(text)
    phi = _parse_imp(toks, sig)
    if toks.peek() is not None:
        raise ParseError(f"trailing input {toks.peek()!r}", toks.pos())
    return phi


def _parse_imp(toks, sig) -> Formula:
    left = _parse_or(toks, sig)
    tok = toks.peek()
    if tok == "->":
        toks.next()
        return Implies(left, _parse_imp(toks, sig))
    if tok == "-*":
        toks.next()
        return Wand(left, _parse_imp(toks, sig))
    return left


def _parse_or(toks, sig) -> Formula:
    left = _parse_and(toks, sig)
    while toks.peek() == "|":
        toks.next()
        left = Or(left, _parse_and(toks, sig))
    return left


def _parse_and(toks, sig) -> Formula:
    left = _parse_star(toks, sig)
    while toks.peek() == "&":
        toks.next()
        left = And(left, _parse_star(toks, sig))
    return left


def _parse_star(toks, sig) -> Formula:
    left = _parse_unary(toks, sig)
    while toks.peek() == "*":
        toks.next()
        left = Star(left, _parse_unary(toks, sig))
    return left


def _parse_unary(toks, sig) -> Formula:
    tok = toks.peek()
    if tok is None:
        raise ParseError("unexpected end of input", toks.pos())
    if tok == "!":
        toks.next()
        return Not(_parse_unary(toks, sig))
    if tok in ("[", "<"):
        return _parse_modal(toks, sig)
    if tok == "(":
        toks.next()
        phi = _parse_imp(toks, sig)
        toks.expect(")")
        return phi
    if tok == "top":
        toks.next()
        return TOP
    if tok == "bot":
        toks.next()
        return BOT
    if tok == "I":
        toks.next()
        return UNIT
    if _NAME.match(tok):
        toks.next()
        return Atom(tok)
    raise ParseError(f"unexpected token {tok!r}", toks.pos())


def _parse_modal(toks, sig) -> Formula:
    bracket = toks.next()
    closing = "]" if bracket == "[" else ">"
    pos = toks.pos()
    letter = toks.next()
    if (bracket, letter) not in _MODAL_TAG:
        raise ParseError(f"expected modality letter C, D or E, got {letter!r}", pos)
    op = _MODAL_TAG[(bracket, letter)]
    pos = toks.pos()
    agent = toks.next()
    if not _NAME.match(agent):
        raise ParseError(f"expected agent name, got {agent!r}", pos)
    if agent not in sig.agents:
        raise UnknownAgentError(agent)
    toks.expect(";")
    names = [toks.next()]
    while toks.peek() == ".":
        toks.next()
        names.append(toks.next())
    for n in names:
        if not _NAME.match(n):
            raise ParseError(f"expected resource name, got {n!r}", toks.pos())
    term = term_of(names, sig)
    toks.expect(closing)
    return Modal(op, agent, term, _parse_unary(toks, sig))


# ---------------------------------------------------------------------------
# Printer (inverse of the parser up to whitespace)

_LEVEL_IMP, _LEVEL_OR, _LEVEL_AND, _LEVEL_STAR, _LEVEL_UNARY = range(5)

_MODAL_TEXT = {
    C: ("[", "C", "]"), DDUAL: ("[", "D", "]"), E: ("[", "E", "]"),
    CDUAL: ("<", "C", ">"), D: ("<", "D", ">"), EDUAL: ("<", "E", ">"),
}


def format_formula(phi: Formula, unit: str = "e") -> str:
    return _fmt(phi, _LEVEL_IMP, unit)


def _fmt(phi: Formula, level: int, unit: str) -> str:
    def wrap(text, mine):
        return f"({text})" if mine < level else text

    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, Top):
        return "top"
    if isinstance(phi, Bot):
        return "bot"
    if isinstance(phi, Unit):
        return "I"
    if isinstance(phi, Not):
        return f"!{_fmt(phi.body, _LEVEL_UNARY, unit)}"
    if isinstance(phi, Modal):
        o, letter, c = _MODAL_TEXT[phi.op]
        return f"{o}{letter} {phi.agent}; {phi.term.text(unit)}{c} {_fmt(phi.body, _LEVEL_UNARY, unit)}"
    if isinstance(phi, Implies):
        return wrap(f"{_fmt(phi.left, _LEVEL_OR, unit)} -> {_fmt(phi.right, _LEVEL_IMP, unit)}", _LEVEL_IMP)
    if isinstance(phi, Wand):
        return wrap(f"{_fmt(phi.left, _LEVEL_OR, unit)} -* {_fmt(phi.right, _LEVEL_IMP, unit)}", _LEVEL_IMP)
    if isinstance(phi, Or):
        return wrap(f"{_fmt(phi.left, _LEVEL_OR, unit)} | {_fmt(phi.right, _LEVEL_AND, unit)}", _LEVEL_OR)
    if isinstance(phi, And):
        return wrap(f"{_fmt(phi.left, _LEVEL_AND, unit)} & {_fmt(phi.right, _LEVEL_STAR, unit)}", _LEVEL_AND)
    if isinstance(phi, Star):
        return wrap(f"{_fmt(phi.left, _LEVEL_STAR, unit)} * {_fmt(phi.right, _LEVEL_UNARY, unit)}", _LEVEL_STAR)
    raise TypeError(f"not a formula: {phi!r}")
