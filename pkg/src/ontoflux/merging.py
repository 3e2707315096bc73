"""Probabilistic merging of an external ontology into a local one.

Mappings are directed bridges: a source atom pattern over the external
namespace, a target pattern over the local namespace, and the
probability that instances of the source belong to the target.  A merge
applies every mapping to every asserted external ground fact, then
chains the resulting local atoms through the local T-Box and R-Box.

Each derived atom carries its provenance as a set of derivation paths,
every path being the set of mapping ids it relied on.  The empty path
marks a purely local derivation and has probability one; a path's
probability is the product over its mappings (independent mappings must
all hold); alternative paths combine by noisy-OR.  Conjunctive queries
multiply conjunct probabilities while provenance is disjoint and switch
to exact possible-worlds enumeration when conjuncts share mappings,
falling back to the product with an approximation marker once the
number of distinct mappings involved makes enumeration unaffordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    MalformedItemError,
    NamespaceClashError,
    ProbabilityOutOfRangeError,
    UnsafeQueryError,
)
from .kb import (
    Atom,
    ClassAtom,
    EntityName,
    HornRule,
    Individual,
    KnowledgeBase,
    PropertyAtom,
    PropertyDomain,
    PropertyRange,
    SubClassOf,
    UnionEquivalence,
    Variable,
    atom_terms,
    is_ground,
    match_rule_body,
    substitute,
)

EXACT_ENUMERATION_LIMIT = 16

Path = frozenset  # of mapping ids
PathSet = frozenset  # of Path


def atom_predicate(atom: Atom) -> EntityName:
    return atom.concept if isinstance(atom, ClassAtom) else atom.prop


def _variables(atom: Atom) -> frozenset[Variable]:
    return frozenset(t for t in atom_terms(atom) if isinstance(t, Variable))


@dataclass(frozen=True)
class Mapping:
    """Directed probabilistic bridge from an external atom to a local one.

    ``negative_probability`` is the reverse conditional (chance that a
    non-member of the source belongs to the target); it is stored when a
    document provides it but plays no role in scoring.
    """

    mapping_id: str
    target: Atom
    source: Atom
    probability: float
    negative_probability: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ProbabilityOutOfRangeError(
                f"mapping {self.mapping_id}: probability {self.probability} outside [0, 1]"
            )
        if self.negative_probability is not None and not 0.0 <= self.negative_probability <= 1.0:
            raise ProbabilityOutOfRangeError(
                f"mapping {self.mapping_id}: negative probability outside [0, 1]"
            )
        if _variables(self.source) != _variables(self.target):
            raise MalformedItemError(
                f"mapping {self.mapping_id}: source and target must use the same variables"
            )
        if atom_predicate(self.source).namespace == atom_predicate(self.target).namespace:
            raise MalformedItemError(
                f"mapping {self.mapping_id}: source and target namespaces must differ"
            )


@dataclass(frozen=True)
class DerivedFact:
    """A ground local atom with its derivation paths and combined probability."""

    atom: Atom
    probability: float
    paths: PathSet

    @property
    def local(self) -> bool:
        return frozenset() in self.paths

    def mapping_ids(self) -> frozenset[str]:
        return frozenset(m for path in self.paths for m in path)


@dataclass(frozen=True)
class MergedKB:
    local: KnowledgeBase
    external: KnowledgeBase
    mappings: tuple[Mapping, ...]
    derived: dict[Atom, DerivedFact] = field(default_factory=dict)

    def fact(self, atom: Atom) -> Optional[DerivedFact]:
        return self.derived.get(atom)


def complement(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ProbabilityOutOfRangeError(f"probability {p} outside [0, 1]")
    return 1.0 - p


def combine_noisy_or(ps: Sequence[float]) -> float:
    """1 - prod(1 - p): the chance at least one independent derivation holds."""
    if not ps:
        raise MalformedItemError("noisy-OR needs at least one probability")
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ProbabilityOutOfRangeError(f"probability {p} outside [0, 1]")
    if len(ps) == 1:
        return float(ps[0])  # skip the double complement's rounding
    return 1.0 - math.prod(1.0 - p for p in ps)


def _canonical(paths: Iterable[Path]) -> PathSet:
    """Keep the local path plus the subset-minimal mapped paths.

    A path that is a superset of another mapped path holds only in a
    subset of its worlds and never changes any probability; the local
    path is kept alongside so that mapped-only scoring still sees the
    mapped derivations it would otherwise absorb.
    """
    mapped = {p for p in paths if p}
    minimal = {p for p in mapped if not any(q < p for q in mapped)}
    if frozenset() in set(paths) or any(not p for p in paths):
        minimal.add(frozenset())
    return frozenset(minimal)


def _path_probability(path: Path, prob_of: dict[str, float]) -> float:
    return math.prod(prob_of[m] for m in path) if path else 1.0


def fact_probability(
    paths: PathSet, prob_of: dict[str, float], mapped_only: bool = False
) -> Optional[float]:
    """Noisy-OR score of a path set; None when no usable path remains."""
    usable = [p for p in paths if p] if mapped_only else list(paths)
    if not usable:
        return None
    if any(not p for p in usable):
        return 1.0
    minimal = [p for p in usable if not any(q < p for q in usable)]
    return combine_noisy_or([_path_probability(p, prob_of) for p in minimal])


def _local_namespaces(kb: KnowledgeBase) -> set[str]:
    names: set[str] = set()
    for ax in kb.tbox:
        if isinstance(ax, SubClassOf):
            names.update((ax.sub.namespace, ax.sup.namespace))
        elif isinstance(ax, UnionEquivalence):
            names.add(ax.whole.namespace)
            names.update(p.namespace for p in ax.parts)
        elif isinstance(ax, (PropertyDomain, PropertyRange)):
            names.update((ax.prop.namespace, ax.concept.namespace))
        else:
            names.update(
                getattr(ax, f).namespace
                for f in ("a", "b", "concept", "prop", "filler")
                if hasattr(ax, f)
            )
    for atom in kb.abox:
        names.add(atom_predicate(atom).namespace)
    for rule in kb.rbox:
        for atom in (*rule.body, rule.head):
            names.add(atom_predicate(atom).namespace)
    return names


def merge(
    local: KnowledgeBase, external: KnowledgeBase, mappings: Sequence[Mapping]
) -> MergedKB:
    """Derive the merged fact set: local facts, mapped facts, local chaining.

    Mappings consume the external A-Box as asserted; chaining afterwards
    uses only the local T-Box and R-Box.  Multiple derivations of one
    atom keep all (minimal) paths and combine by noisy-OR.
    """
    local_names = _local_namespaces(local)
    for m in mappings:
        target_ns = atom_predicate(m.target).namespace
        if local_names and target_ns not in local_names:
            raise NamespaceClashError(
                f"mapping {m.mapping_id} targets namespace {target_ns}, "
                f"local ontology uses {', '.join(sorted(local_names))}"
            )

    paths: dict[Atom, set[Path]] = {}

    def add(atom: Atom, path: Path) -> bool:
        existing = paths.setdefault(atom, set())
        before = frozenset(existing)
        updated = _canonical(existing | {path})
        if updated != before:
            existing.clear()
            existing.update(updated)
            return True
        return False

    for atom in local.abox:
        add(atom, frozenset())
    for m in mappings:
        for atom in sorted(external.abox, key=str):
            for binding in match_rule_body((m.source,), (atom,)):
                mapped = substitute(m.target, binding)
                if is_ground(mapped):
                    add(mapped, frozenset({m.mapping_id}))

    subclass = sorted((ax for ax in local.tbox if isinstance(ax, SubClassOf)), key=str)
    unions = sorted((ax for ax in local.tbox if isinstance(ax, UnionEquivalence)), key=str)
    domains = sorted((ax for ax in local.tbox if isinstance(ax, PropertyDomain)), key=str)
    ranges = sorted((ax for ax in local.tbox if isinstance(ax, PropertyRange)), key=str)
    rules = sorted(local.rbox, key=lambda r: r.rule_id)

    changed = True
    while changed:
        changed = False
        for atom in sorted(paths, key=str):
            atom_paths = list(paths[atom])
            heads: list[Atom] = []
            if isinstance(atom, ClassAtom):
                heads.extend(ClassAtom(ax.sup, atom.subject) for ax in subclass if ax.sub == atom.concept)
                heads.extend(ClassAtom(ax.whole, atom.subject) for ax in unions if atom.concept in ax.parts)
            else:
                heads.extend(ClassAtom(ax.concept, atom.subject) for ax in domains if ax.prop == atom.prop)
                heads.extend(ClassAtom(ax.concept, atom.object) for ax in ranges if ax.prop == atom.prop)
            for head in heads:
                for path in atom_paths:
                    changed |= add(head, path)
        for rule in rules:
            facts = sorted(paths, key=str)
            for binding in match_rule_body(rule.body, facts):
                premises = [substitute(b, binding) for b in rule.body]
                head = substitute(rule.head, binding)
                combos: list[Path] = [frozenset()]
                for premise in premises:
                    combos = [c | p for c in combos for p in sorted(paths[premise], key=sorted)]
                for path in combos:
                    changed |= add(head, path)

    prob_of = {m.mapping_id: m.probability for m in mappings}
    derived = {}
    for atom in sorted(paths, key=str):
        pset = frozenset(paths[atom])
        derived[atom] = DerivedFact(atom, fact_probability(pset, prob_of), pset)
    return MergedKB(local, external, tuple(mappings), derived)


@dataclass(frozen=True)
class QueryAnswer:
    binding: tuple[tuple[str, EntityName], ...]
    probability: float
    approximate: bool = False

    def as_dict(self) -> dict[str, EntityName]:
        return dict(self.binding)


def _score_exact(conjunct_paths: list[list[Path]], prob_of: dict[str, float]) -> float:
    ids = sorted({m for ps in conjunct_paths for p in ps for m in p})
    total = 0.0
    for bits in range(1 << len(ids)):
        held = frozenset(ids[i] for i in range(len(ids)) if bits >> i & 1)
        weight = 1.0
        for i, mid in enumerate(ids):
            weight *= prob_of[mid] if bits >> i & 1 else 1.0 - prob_of[mid]
        if all(any(p <= held for p in ps) for ps in conjunct_paths):
            total += weight
    return total


def query(
    merged: MergedKB, conjuncts: Sequence[Atom], mapped_only: bool = False
) -> list[QueryAnswer]:
    """Answer a conjunctive query over the merged fact set.

    With ``mapped_only`` the purely local derivation paths are ignored,
    scoring each binding by what the mappings alone support.  Results
    are sorted by descending probability, then by binding.
    """
    if not conjuncts:
        raise UnsafeQueryError("query needs at least one conjunct")
    prob_of = {m.mapping_id: m.probability for m in merged.mappings}

    base: dict[Atom, list[Path]] = {}
    for atom, fact in merged.derived.items():
        usable = [p for p in fact.paths if p] if mapped_only else list(fact.paths)
        if not usable:
            continue
        if any(not p for p in usable):
            usable = [frozenset()]
        else:
            usable = [p for p in usable if not any(q < p for q in usable)]
        base[atom] = usable

    answers = []
    for binding in match_rule_body(tuple(conjuncts), sorted(base, key=str)):
        bound = [substitute(c, binding) for c in conjuncts]
        if any(atom not in base for atom in bound):
            continue
        conjunct_paths = [base[atom] for atom in bound]
        flat = [p for ps in conjunct_paths for p in ps]
        disjoint = all(
            sum(1 for p in flat if m in p) <= 1 for p in flat for m in p
        )
        approximate = False
        if disjoint:
            probability = math.prod(
                fact_probability(frozenset(ps), prob_of) for ps in conjunct_paths
            )
        else:
            distinct = {m for p in flat for m in p}
            if len(distinct) <= EXACT_ENUMERATION_LIMIT:
                probability = _score_exact(conjunct_paths, prob_of)
            else:
                probability = math.prod(
                    fact_probability(frozenset(ps), prob_of) for ps in conjunct_paths
                )
                approximate = True
        key = tuple(sorted((var.token, value.name) for var, value in binding.items()))
        answers.append(QueryAnswer(key, probability, approximate))

    unique: dict[tuple, QueryAnswer] = {}
    for ans in answers:
        unique.setdefault(ans.binding, ans)
    return sorted(
        unique.values(), key=lambda a: (-a.probability, tuple(str(v) for _, v in a.binding))
    )
