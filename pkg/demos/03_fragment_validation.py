"""Structural validation of Bayesian-network fragments.

A fragment declares event, action, and agent nodes and a DAG over
them.  Agents are the resident variables: each carries one local
probability table, actions must name the agent they instantiate, and
actions and agents must be roots.  The validator reports every
structural defect with a stable label, so a theory can be linted
before any inference is attempted.
"""

from ontoflux.io import parse_fragments
from ontoflux.mfrag import classify_fragment, validate_mtheory

BROKEN = """
mtheory rollout
mfrag deploy
event outage
action push
agent ci
values outage = up | down
values push = now | later
values ci = busy | idle
edge push -> outage
edge ci -> outage
instance push ci
dist ci (push)
row ci now: 0.6 0.399
"""


def main() -> None:
    theory = parse_fragments(BROKEN)
    errors = validate_mtheory(theory)
    print("defects in the broken theory:")
    for err in errors:
        print(f"  {err}")

    # two defects: ci's only row does not sum to one, and its table
    # never covers the parent value `later`
    fixed_text = BROKEN.replace("row ci now: 0.6 0.399", "row ci now: 0.6 0.4")
    fixed_text += "row ci later: 0.9 0.1\n"
    theory = parse_fragments(fixed_text)
    assert validate_mtheory(theory) == []
    print("\nafter fixing the row sum and covering `later`: structurally valid")

    (fragment,) = theory.fragments
    kind = classify_fragment(fragment, has_findings=False)
    print(f"fragment {fragment.name} is {kind.name.lower()}")


if __name__ == "__main__":
    main()
