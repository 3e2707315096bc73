"""Immutable knowledge bases with closed-world class closures.

A knowledge base is the triple of terminological axioms (T-Box),
ground assertions stamped with the simulation time they were made
(A-Box), and safe Horn rules (R-Box).  Reasoning is a restricted
forward chainer: subclass and union propagation, property domain/range
inference, and Horn rules whose variables bind only to known
individuals.  That fragment is decidable and the fixpoint is finite.

Queries are three-valued.  Membership that can be derived is True;
membership in a class whose extension has been explicitly closed is
False when the individual is outside the recorded closure; everything
else is Unknown.  Closing a class is how the open-world default is
switched off for the classes a monitor needs to reason about
negatively.

All values here are immutable; every operation returns a new
``KnowledgeBase`` and never mutates its input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

from .errors import MalformedItemError

_LOCAL_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class EntityName:
    """A namespaced name, e.g. ``O1:Event``."""

    namespace: str
    local: str

    def __post_init__(self):
        if not self.namespace:
            raise MalformedItemError("entity namespace must be nonempty")
        if not _LOCAL_TOKEN.match(self.local):
            raise MalformedItemError(f"bad local token: {self.local!r}")

    def __str__(self) -> str:
        return f"{self.namespace}:{self.local}"


@dataclass(frozen=True, order=True)
class Individual:
    name: EntityName

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True, order=True)
class Variable:
    token: str

    def __str__(self) -> str:
        return self.token


Term = Union[Individual, Variable]


@dataclass(frozen=True, order=True)
class ClassAtom:
    concept: EntityName
    subject: Term

    def __str__(self) -> str:
        return f"{self.concept}({self.subject})"


@dataclass(frozen=True, order=True)
class PropertyAtom:
    prop: EntityName
    subject: Term
    object: Term

    def __str__(self) -> str:
        return f"{self.prop}({self.subject}, {self.object})"


Atom = Union[ClassAtom, PropertyAtom]


def atom_terms(atom: Atom) -> tuple[Term, ...]:
    if isinstance(atom, ClassAtom):
        return (atom.subject,)
    return (atom.subject, atom.object)


def is_ground(atom: Atom) -> bool:
    return all(isinstance(t, Individual) for t in atom_terms(atom))


# --- T-Box axiom forms -------------------------------------------------


@dataclass(frozen=True, order=True)
class SubClassOf:
    sub: EntityName
    sup: EntityName


@dataclass(frozen=True, order=True)
class DisjointClasses:
    a: EntityName
    b: EntityName

    def __post_init__(self):
        if self.a == self.b:
            raise MalformedItemError("disjointness arguments must be distinct")


@dataclass(frozen=True, order=True)
class UnionEquivalence:
    whole: EntityName
    parts: tuple[EntityName, ...]

    def __post_init__(self):
        if len(set(self.parts)) < 2:
            raise MalformedItemError("union must have at least 2 distinct parts")


@dataclass(frozen=True, order=True)
class PropertyDomain:
    prop: EntityName
    concept: EntityName


@dataclass(frozen=True, order=True)
class PropertyRange:
    prop: EntityName
    concept: EntityName


@dataclass(frozen=True, order=True)
class AllValuesFrom:
    """``concept ⊆ ∀prop.filler``.  Validated, never used to infer."""

    concept: EntityName
    prop: EntityName
    filler: EntityName


TBoxAxiom = Union[
    SubClassOf, DisjointClasses, UnionEquivalence, PropertyDomain, PropertyRange, AllValuesFrom
]

_TBOX_TYPES = (SubClassOf, DisjointClasses, UnionEquivalence, PropertyDomain, PropertyRange, AllValuesFrom)


# --- A-Box / R-Box -----------------------------------------------------


@dataclass(frozen=True, order=True)
class ABoxAssertion:
    """A ground atom stamped with the time it was asserted."""

    atom: Atom
    asserted_at: float = 0.0

    def __post_init__(self):
        if not is_ground(self.atom):
            raise MalformedItemError(f"A-Box atom must be ground: {self.atom}")
        if self.asserted_at < 0:
            raise MalformedItemError("asserted_at must be nonnegative")


@dataclass(frozen=True, order=True)
class HornRule:
    """Safe Horn rule: every head variable occurs in the body."""

    rule_id: str
    body: tuple[Atom, ...]
    head: Atom

    def __post_init__(self):
        if not self.body:
            raise MalformedItemError(f"rule {self.rule_id}: body must be nonempty")
        body_vars = {t for a in self.body for t in atom_terms(a) if isinstance(t, Variable)}
        head_vars = {t for t in atom_terms(self.head) if isinstance(t, Variable)}
        if not head_vars <= body_vars:
            loose = ", ".join(sorted(v.token for v in head_vars - body_vars))
            raise MalformedItemError(f"rule {self.rule_id}: unsafe head variables {loose}")


@dataclass(frozen=True)
class ClosureRecord:
    concept: EntityName
    members: frozenset[EntityName]
    closed_at: float


class Truth(Enum):
    """Three-valued query answer."""

    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Violation:
    """An individual provably violating a T-Box constraint, with the axiom cited."""

    individual: EntityName
    axiom: TBoxAxiom


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable T-Box / A-Box / R-Box snapshot with closure records.

    The A-Box maps each ground atom to the earliest time at which it was
    asserted; re-asserting an atom never moves its timestamp forward.
    """

    tbox: frozenset[TBoxAxiom] = frozenset()
    abox: dict[Atom, float] = field(default_factory=dict)
    rbox: frozenset[HornRule] = frozenset()
    closures: dict[EntityName, ClosureRecord] = field(default_factory=dict)

    @staticmethod
    def empty() -> "KnowledgeBase":
        return KnowledgeBase()

    def assertions(self) -> list[ABoxAssertion]:
        return [ABoxAssertion(a, t) for a, t in sorted(self.abox.items())]


KBItem = Union[TBoxAxiom, ABoxAssertion, HornRule]


def assert_item(kb: KnowledgeBase, item: KBItem) -> KnowledgeBase:
    """Return a new KB containing ``item``.  Idempotent for duplicates."""
    if isinstance(item, _TBOX_TYPES):
        if item in kb.tbox:
            return kb
        return KnowledgeBase(kb.tbox | {item}, dict(kb.abox), kb.rbox, dict(kb.closures))
    if isinstance(item, ABoxAssertion):
        existing = kb.abox.get(item.atom)
        if existing is not None and existing <= item.asserted_at:
            return kb
        abox = dict(kb.abox)
        abox[item.atom] = item.asserted_at if existing is None else min(existing, item.asserted_at)
        return KnowledgeBase(kb.tbox, abox, kb.rbox, dict(kb.closures))
    if isinstance(item, HornRule):
        if item in kb.rbox:
            return kb
        return KnowledgeBase(kb.tbox, dict(kb.abox), kb.rbox | {item}, dict(kb.closures))
    raise MalformedItemError(f"cannot assert {type(item).__name__}")


def assert_all(kb: KnowledgeBase, items: Iterable[KBItem]) -> KnowledgeBase:
    for item in items:
        kb = assert_item(kb, item)
    return kb


# --- entailment --------------------------------------------------------


def _match_term(pattern: Term, value: Individual, binding: dict) -> dict | None:
    if isinstance(pattern, Individual):
        return binding if pattern == value else None
    bound = binding.get(pattern)
    if bound is None:
        out = dict(binding)
        out[pattern] = value
        return out
    return binding if bound == value else None


def _match_atom(pattern: Atom, fact: Atom, binding: dict) -> dict | None:
    if isinstance(pattern, ClassAtom):
        if not isinstance(fact, ClassAtom) or pattern.concept != fact.concept:
            return None
        return _match_term(pattern.subject, fact.subject, binding)
    if not isinstance(fact, PropertyAtom) or pattern.prop != fact.prop:
        return None
    binding = _match_term(pattern.subject, fact.subject, binding)
    if binding is None:
        return None
    return _match_term(pattern.object, fact.object, binding)


def substitute(atom: Atom, binding: dict) -> Atom:
    def term(t: Term) -> Term:
        return binding.get(t, t) if isinstance(t, Variable) else t

    if isinstance(atom, ClassAtom):
        return ClassAtom(atom.concept, term(atom.subject))
    return PropertyAtom(atom.prop, term(atom.subject), term(atom.object))


def match_rule_body(body: tuple[Atom, ...], facts: Iterable[Atom]) -> list[dict]:
    """All variable bindings under which every body atom matches a fact."""
    facts = list(facts)
    bindings = [{}]
    for pattern in body:
        extended = []
        for binding in bindings:
            for fact in facts:
                out = _match_atom(pattern, fact, binding)
                if out is not None:
                    extended.append(out)
        bindings = extended
        if not bindings:
            break
    return bindings


def saturate(kb: KnowledgeBase) -> frozenset[Atom]:
    """Least fixpoint of the ground atoms derivable from the KB.

    Combines asserted atoms with subclass propagation, union
    part-to-whole propagation, property domain/range inference, and
    Horn-rule firing over known individuals.  Terminates because the
    ground atom space over the KB's individuals is finite.
    """
    atoms: set[Atom] = set(kb.abox)
    subclass = [ax for ax in kb.tbox if isinstance(ax, SubClassOf)]
    unions = [ax for ax in kb.tbox if isinstance(ax, UnionEquivalence)]
    domains = [ax for ax in kb.tbox if isinstance(ax, PropertyDomain)]
    ranges = [ax for ax in kb.tbox if isinstance(ax, PropertyRange)]
    rules = list(kb.rbox)

    changed = True
    while changed:
        changed = False
        fresh: set[Atom] = set()
        for a in atoms:
            if isinstance(a, ClassAtom):
                for ax in subclass:
                    if ax.sub == a.concept:
                        fresh.add(ClassAtom(ax.sup, a.subject))
                for ax in unions:
                    if a.concept in ax.parts:
                        fresh.add(ClassAtom(ax.whole, a.subject))
            else:
                for ax in domains:
                    if ax.prop == a.prop:
                        fresh.add(ClassAtom(ax.concept, a.subject))
                for ax in ranges:
                    if ax.prop == a.prop:
                        fresh.add(ClassAtom(ax.concept, a.object))
        for rule in rules:
            for binding in match_rule_body(rule.body, atoms):
                fresh.add(substitute(rule.head, binding))
        if not fresh <= atoms:
            atoms |= fresh
            changed = True
    return frozenset(atoms)


def entailed_members(kb: KnowledgeBase, concept: EntityName) -> set[EntityName]:
    """Every individual provably a member of ``concept`` (empty if unknown)."""
    return {
        a.subject.name
        for a in saturate(kb)
        if isinstance(a, ClassAtom) and a.concept == concept and isinstance(a.subject, Individual)
    }


def check_disjointness(kb: KnowledgeBase) -> list[Violation]:
    """Individuals provably in both halves of a disjointness axiom."""
    out = []
    derived = saturate(kb)
    members: dict[EntityName, set[EntityName]] = {}
    for a in derived:
        if isinstance(a, ClassAtom) and isinstance(a.subject, Individual):
            members.setdefault(a.concept, set()).add(a.subject.name)
    for ax in sorted(kb.tbox, key=str):
        if isinstance(ax, DisjointClasses):
            both = members.get(ax.a, set()) & members.get(ax.b, set())
            out.extend(Violation(i, ax) for i in sorted(both))
    return out


def check_all_values_from(kb: KnowledgeBase) -> list[Violation]:
    """Definite violations of universal restrictions.

    A violation needs an entailed subject of the restricted class, a
    property edge to an object, and an object that is *definitely* not
    in the filler class, which requires the filler to be closed.
    Under the open world, a merely unproven filler membership is not a
    violation.
    """
    out = []
    derived = saturate(kb)
    for ax in sorted(kb.tbox, key=str):
        if not isinstance(ax, AllValuesFrom):
            continue
        subjects = entailed_members(kb, ax.concept)
        for a in sorted(derived, key=str):
            if isinstance(a, PropertyAtom) and a.prop == ax.prop:
                if a.subject.name in subjects:
                    if is_member(kb, a.object.name, ax.filler) is Truth.FALSE:
                        out.append(Violation(a.subject.name, ax))
    return out


def close_class(kb: KnowledgeBase, concept: EntityName, now: float) -> KnowledgeBase:
    """Record the provable extension of ``concept`` as closed at ``now``.

    After closing, non-membership queries against the concept answer
    False instead of Unknown.  Re-closing replaces the record; closing
    backwards in time is rejected.
    """
    prior = kb.closures.get(concept)
    if prior is not None and now < prior.closed_at:
        raise ValueError(f"cannot close {concept} at {now} before existing closure at {prior.closed_at}")
    closures = dict(kb.closures)
    closures[concept] = ClosureRecord(concept, frozenset(entailed_members(kb, concept)), now)
    return KnowledgeBase(kb.tbox, dict(kb.abox), kb.rbox, closures)


def is_member(kb: KnowledgeBase, individual: EntityName, concept: EntityName) -> Truth:
    """Three-valued membership under the closure semantics."""
    if individual in entailed_members(kb, concept):
        return Truth.TRUE
    record = kb.closures.get(concept)
    if record is not None and individual not in record.members:
        return Truth.FALSE
    return Truth.UNKNOWN
