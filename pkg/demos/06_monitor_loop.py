"""Run the tick loop: ingest events, check deadlines, merge, close.

Each tick advances the clock by one period and performs the same five
steps in order: (a) ingest the facts that arrived during the period,
(b) log actions and update deadline propositions, (c) pick which
mappings an acceptance policy admits, (d) re-close the configured
concepts on the grown ontology, (e) advance the clock.  The emitted
log is complete: replaying it rebuilds the monitor state exactly.
"""

from ontoflux import monitor
from ontoflux.io import parse_events, parse_mappings, parse_ontology, parse_query
from ontoflux.kb import EntityName, Truth, is_member
from ontoflux.merging import query
from ontoflux.temporal import ActionPattern, ActionRecord, Interval, Polarity, TemporalProposition

BASE = """
namespace O1
class O1:Event
class O1:Subject
property O1:keyword
allvalues O1:Event O1:keyword O1:Subject
assert Event(Trip)
assert keyword(Trip, Sea)
"""

EXTERNAL = """
namespace O2
class O2:Event
class O2:Action
property O2:about
subclass O2:Action O2:Event
assert Action(Trip)
assert about(Trip, Place)
"""

MAPPINGS = """
map m1: O1:Event(x) <- O2:Event(x) ; P(0.8)
map m2: O1:Event(x) <- O2:Action(x) ; P(0.9)
map m4: O1:keyword(x, y) <- O2:about(x, y) ; P(0.9)
"""

SCRIPT = """
namespace O1
at 0.5 assert Event(Conference)
at 1.25 action sync1 O1:SyncAction by Bot target O1 O2
at 2.5 assert Event(Workshop)
"""


def main() -> None:
    kb = parse_ontology(BASE)
    event = EntityName("O1", "Event")
    sync = EntityName("O1", "SyncAction")
    must_sync = TemporalProposition(
        "must_sync", Polarity.POSITIVE, ActionPattern(sync), Interval(1.0, 2.0)
    )

    state = monitor.init(kb, closed_concepts=(event,), propositions=(must_sync,), upper_namespace="O1")
    for item in parse_events(SCRIPT):
        if isinstance(item, ActionRecord):
            state = monitor.record_action(state, item)
        else:
            state = monitor.enqueue_event(state, item)

    policy = monitor.MergePolicy(acceptance_threshold=0.85)
    mappings = parse_mappings(MAPPINGS)
    external = parse_ontology(EXTERNAL)
    for _ in range(3):
        state = monitor.tick(state, policy=policy, mappings=mappings, external_kb=external)

    print("event log:")
    for line in state.event_log:
        print(f"  {line}")

    # the closed concept is definite: members are true, the rest false
    trip = EntityName("i", "Trip")
    stranger = EntityName("i", "Stranger")
    print("\nTrip in Event:", is_member(state.kb, trip, event))
    print("Stranger in Event:", is_member(state.kb, stranger, event))
    assert is_member(state.kb, stranger, event) is Truth.FALSE

    # the accepted mappings materialized a merged view we can query
    answers = query(state.merged, parse_query("O1:keyword(Trip, y)"))
    print("\nkeywords of Trip in the merged view:")
    for a in answers:
        print(f"  y={dict(a.binding)['y'].local}  p={a.probability:.9f}")

    # the log alone rebuilds the same state
    replayed = monitor.replay_log(
        state.event_log,
        parse_ontology(BASE),
        (event,),
        propositions=(must_sync,),
        upper_namespace="O1",
        policy=policy,
        mappings=mappings,
        external_kb=external,
    )
    assert replayed == state
    print("\nreplaying the log reproduces the state exactly")


if __name__ == "__main__":
    main()
