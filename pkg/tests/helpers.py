"""Shared test utilities: a random KB generator and a possible-worlds oracle.

The oracle marginalizes a conjunctive query over every subset of the
mappings by brute force.  It shares the deterministic reasoner with the
library but none of the derivation-path bookkeeping, so agreement is
meaningful evidence that the noisy-OR / minimal-path scoring is right.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from ontoflux.kb import (
    ABoxAssertion,
    Atom,
    ClassAtom,
    DisjointClasses,
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
    assert_all,
    is_ground,
    match_rule_body,
    saturate,
    substitute,
)
from ontoflux.merging import Mapping


# --- possible-worlds oracle ----------------------------------------------


def _mapped_atoms(external: KnowledgeBase, held: Sequence[Mapping]) -> set[Atom]:
    out: set[Atom] = set()
    for m in held:
        for atom in external.abox:
            for binding in match_rule_body((m.source,), (atom,)):
                target = substitute(m.target, binding)
                if is_ground(target):
                    out.add(target)
    return out


def _world_support(
    local: KnowledgeBase, external: KnowledgeBase, held: Sequence[Mapping]
) -> tuple[frozenset[Atom], frozenset[Atom]]:
    """(derivable, mapped-support) atom sets for one world.

    An atom has mapped support when some derivation of it consumes at
    least one mapping-imported fact; a fact can carry both flavors.
    """
    mapped = _mapped_atoms(external, held)
    base = set(local.abox) | mapped
    world = assert_all(
        KnowledgeBase(local.tbox, {}, local.rbox),
        [ABoxAssertion(a, 0.0) for a in sorted(base, key=str)],
    )
    derivable = saturate(world)

    supported = set(mapped)
    changed = True
    while changed:
        changed = False
        for atom in list(supported):
            heads: list[Atom] = []
            if isinstance(atom, ClassAtom):
                for ax in local.tbox:
                    if isinstance(ax, SubClassOf) and ax.sub == atom.concept:
                        heads.append(ClassAtom(ax.sup, atom.subject))
                    elif isinstance(ax, UnionEquivalence) and atom.concept in ax.parts:
                        heads.append(ClassAtom(ax.whole, atom.subject))
            else:
                for ax in local.tbox:
                    if isinstance(ax, PropertyDomain) and ax.prop == atom.prop:
                        heads.append(ClassAtom(ax.concept, atom.subject))
                    elif isinstance(ax, PropertyRange) and ax.prop == atom.prop:
                        heads.append(ClassAtom(ax.concept, atom.object))
            for head in heads:
                if head not in supported:
                    supported.add(head)
                    changed = True
        for rule in local.rbox:
            for binding in match_rule_body(rule.body, derivable):
                premises = [substitute(b, binding) for b in rule.body]
                head = substitute(rule.head, binding)
                if head in supported:
                    continue
                if all(p in derivable for p in premises) and any(p in supported for p in premises):
                    supported.add(head)
                    changed = True
    return frozenset(derivable), frozenset(supported)


def world_scores(
    local: KnowledgeBase,
    external: KnowledgeBase,
    mappings: Sequence[Mapping],
    conjuncts: Sequence[Atom],
    mapped_only: bool = False,
) -> dict[tuple[tuple[str, EntityName], ...], float]:
    """Exact per-binding probabilities by enumerating all mapping subsets."""
    scores: dict[tuple[tuple[str, EntityName], ...], float] = {}
    for bits in range(1 << len(mappings)):
        held = [m for i, m in enumerate(mappings) if bits >> i & 1]
        weight = 1.0
        for i, m in enumerate(mappings):
            weight *= m.probability if bits >> i & 1 else 1.0 - m.probability
        if weight == 0.0:
            continue
        derivable, supported = _world_support(local, external, held)
        facts = supported if mapped_only else derivable
        for binding in match_rule_body(tuple(conjuncts), sorted(facts, key=str)):
            bound = [substitute(c, binding) for c in conjuncts]
            if all(a in facts for a in bound):
                key = tuple(sorted((v.token, value.name) for v, value in binding.items()))
                scores[key] = scores.get(key, 0.0) + weight
    return scores


def world_probability(
    local: KnowledgeBase,
    external: KnowledgeBase,
    mappings: Sequence[Mapping],
    conjuncts: Sequence[Atom],
    binding: Optional[dict[str, str]] = None,
    mapped_only: bool = False,
) -> float:
    """Oracle probability of one binding (variable token -> individual token)."""
    wanted = None
    if binding is not None:
        wanted = tuple(sorted((v, EntityName("i", t)) for v, t in binding.items()))
    scores = world_scores(local, external, mappings, conjuncts, mapped_only)
    if wanted is None:
        if len(scores) != 1:
            raise AssertionError(f"expected a single binding, got {sorted(scores)}")
        return next(iter(scores.values()))
    return scores.get(wanted, 0.0)


# --- random knowledge bases ----------------------------------------------


def random_kb(rng: random.Random, max_size: int = 6) -> KnowledgeBase:
    """A small well-formed KB: random axioms, ground facts, and safe rules."""
    ns = rng.choice(["A", "B"])
    classes = [EntityName(ns, f"C{i}") for i in range(rng.randint(1, 4))]
    props = [EntityName(ns, f"p{i}") for i in range(rng.randint(0, 2))]
    individuals = [Individual(EntityName("i", f"x{i}")) for i in range(rng.randint(1, 5))]

    items: list = []
    for _ in range(rng.randint(0, max_size)):
        kind = rng.randint(0, 5 if props else 2)
        if kind == 0 and len(classes) >= 2:
            a, b = rng.sample(classes, 2)
            items.append(SubClassOf(a, b))
        elif kind == 1 and len(classes) >= 2:
            a, b = rng.sample(classes, 2)
            items.append(DisjointClasses(a, b))
        elif kind == 2 and len(classes) >= 3:
            whole, *parts = rng.sample(classes, 3)
            items.append(UnionEquivalence(whole, tuple(parts)))
        elif kind == 3:
            items.append(PropertyDomain(rng.choice(props), rng.choice(classes)))
        elif kind == 4:
            items.append(PropertyRange(rng.choice(props), rng.choice(classes)))

    for _ in range(rng.randint(0, max_size)):
        when = rng.choice([0.0, 0.5, 1.25, 3.0])
        if props and rng.random() < 0.4:
            atom: Atom = PropertyAtom(
                rng.choice(props), rng.choice(individuals), rng.choice(individuals)
            )
        else:
            atom = ClassAtom(rng.choice(classes), rng.choice(individuals))
        items.append(ABoxAssertion(atom, when))

    for k in range(rng.randint(0, 2)):
        x = Variable("v0")
        body: list[Atom] = [ClassAtom(rng.choice(classes), x)]
        if props and rng.random() < 0.5:
            body.append(PropertyAtom(rng.choice(props), x, rng.choice(individuals)))
        head = ClassAtom(rng.choice(classes), x)
        items.append(HornRule(f"r{k}", tuple(body), head))

    return assert_all(KnowledgeBase.empty(), items)


def random_assertion(rng: random.Random, kb: KnowledgeBase) -> ABoxAssertion:
    """One more ground fact over the KB's own vocabulary (or a fresh name)."""
    concepts = sorted(
        {ax.sub for ax in kb.tbox if isinstance(ax, SubClassOf)}
        | {ax.sup for ax in kb.tbox if isinstance(ax, SubClassOf)},
        key=str,
    )
    atoms = sorted(kb.abox, key=str)
    pool_c = concepts or [EntityName("A", "C0")]
    pool_i = sorted(
        {t.name for a in atoms for t in (a.subject,) if isinstance(t, Individual)},
        key=str,
    ) or [EntityName("i", "x0")]
    concept = rng.choice(pool_c)
    who = Individual(rng.choice(pool_i))
    return ABoxAssertion(ClassAtom(concept, who), rng.choice([0.0, 1.0, 2.5]))
