"""Deadline propositions over an action log.

A positive proposition (obligation) wants a matching action inside a
closed interval; a negative one (prohibition) forbids it.  Both start
pending and settle exactly once, either when a match lands in the
window or when the clock passes the window's end.
"""

from ontoflux.kb import EntityName
from ontoflux.temporal import (
    ActionPattern,
    ActionRecord,
    Interval,
    Polarity,
    TemporalProposition,
    step_all,
)

MERGE = EntityName("up", "MergeAction")
PUBLISH = EntityName("up", "PublishAction")


def record(at: float, kind: EntityName) -> ActionRecord:
    return ActionRecord(at, f"a@{at}", kind, EntityName("i", "Bot"), ())


def main() -> None:
    propositions = [
        # the merge must happen in [2, 5]
        TemporalProposition("must_merge", Polarity.POSITIVE, ActionPattern(MERGE), Interval(2.0, 5.0)),
        # nothing may be published during the freeze window [0, 4]
        TemporalProposition("freeze", Polarity.NEGATIVE, ActionPattern(PUBLISH), Interval(0.0, 4.0)),
        # a second merge in [6, 8] that never comes
        TemporalProposition("merge_again", Polarity.POSITIVE, ActionPattern(MERGE), Interval(6.0, 8.0)),
    ]
    log = [record(1.0, PUBLISH), record(3.5, MERGE)]

    print("log:")
    for rec in log:
        print(f"  t={rec.at}: {rec.kind.local}")

    for now in (0.5, 1.0, 3.5, 4.5, 9.0):
        visible = [r for r in log if r.at <= now]
        propositions = step_all(propositions, visible, now)
        states = ", ".join(f"{p.prop_id}={p.state.name.lower()}" for p in propositions)
        print(f"t={now}: {states}")

    # settled states never move again, whatever arrives later
    late = log + [record(10.0, MERGE)]
    assert step_all(propositions, late, 11.0) == propositions
    print("\nlate actions cannot reopen a settled proposition")


if __name__ == "__main__":
    main()
