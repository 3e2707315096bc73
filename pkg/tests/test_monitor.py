import pytest

from ontoflux import monitor
from ontoflux.errors import ProbabilityOutOfRangeError, StaleEventError
from ontoflux.io import parse_mappings, parse_ontology, parse_query
from ontoflux.kb import (
    ABoxAssertion,
    ClassAtom,
    EntityName,
    Individual,
    KnowledgeBase,
    Truth,
    assert_all,
    entailed_members,
    is_member,
)
from ontoflux.merging import query
from ontoflux.monitor import MergePolicy, MonitorState, enqueue_event, record_action, tick
from ontoflux.simulate import UpdateOrder
from ontoflux.temporal import (
    ActionPattern,
    ActionRecord,
    Interval,
    Polarity,
    PropState,
    TemporalProposition,
    upper_ontology,
)

EVENT = EntityName("up", "Event")
AGENT = EntityName("up", "Agent")
ACTION = EntityName("up", "Action")


def ind(token: str) -> Individual:
    return Individual(EntityName("i", token))


def base_kb() -> KnowledgeBase:
    return assert_all(
        KnowledgeBase.empty(),
        [*upper_ontology(), ABoxAssertion(ClassAtom(AGENT, ind("Bot")))],
    )


def event(at: float, token: str) -> ABoxAssertion:
    return ABoxAssertion(ClassAtom(EVENT, ind(token)), at)


def action(at: float, action_id: str, actor: str = "Bot") -> ActionRecord:
    return ActionRecord(at, action_id, ACTION, EntityName("i", actor))


def test_init_closes_concepts_at_time_zero():
    state = monitor.init(base_kb(), (EVENT, AGENT))
    assert state.clock == 0.0
    assert state.kb.closures[EVENT].closed_at == 0.0
    assert state.kb.closures[AGENT].members == frozenset({EntityName("i", "Bot")})


def test_stale_submissions_are_rejected():
    state = monitor.init(base_kb())
    state = tick(state)
    assert state.clock == 1.0
    with pytest.raises(StaleEventError):
        enqueue_event(state, event(1.0, "E"))
    with pytest.raises(StaleEventError):
        record_action(state, action(0.5, "a1"))
    enqueue_event(state, event(1.001, "E"))
    record_action(state, action(1.001, "a1"))


def test_tick_drains_only_the_next_unit_interval():
    state = monitor.init(base_kb(), (EVENT,))
    state = enqueue_event(state, event(0.5, "Soon"))
    state = enqueue_event(state, event(1.5, "Later"))
    state = tick(state)
    assert ClassAtom(EVENT, ind("Soon")) in state.kb.abox
    assert ClassAtom(EVENT, ind("Later")) not in state.kb.abox
    assert state.pending_events == (event(1.5, "Later"),)
    state = tick(state)
    assert state.kb.abox[ClassAtom(EVENT, ind("Later"))] == 1.5
    assert state.pending_events == ()


def test_tick_log_lines_are_exact():
    state = monitor.init(base_kb(), (EVENT,))
    state = enqueue_event(state, event(0.5, "E1"))
    state = record_action(state, action(0.25, "a1"))
    state = tick(state)
    assert state.event_log == (
        "tick=1 step=a detail=assert up:Event(i:E1) @ 0.5",
        "tick=1 step=b detail=action a1 up:Action by i:Bot @ 0.25 targets=",
        "tick=1 step=d detail=close up:Event members=1",
        "tick=1 step=e detail=clock 1.0",
    )


def test_unknown_actor_is_warned_about():
    state = monitor.init(base_kb())
    state = record_action(state, action(0.5, "a1", actor="Ghost"))
    state = tick(state)
    assert any(
        line == "tick=1 step=b detail=warn actor i:Ghost not entailed in up:Agent"
        for line in state.event_log
    )
    bot = monitor.init(base_kb())
    bot = record_action(bot, action(0.5, "a1", actor="Bot"))
    assert not any("warn" in line for line in tick(bot).event_log)


def test_proposition_transitions_are_logged():
    prop = TemporalProposition(
        "ob1", Polarity.POSITIVE, ActionPattern(ACTION), Interval(0.0, 3.0)
    )
    state = monitor.init(base_kb(), propositions=(prop,))
    state = record_action(state, action(0.5, "a1"))
    state = tick(state)
    assert state.propositions[0].state is PropState.FULFILLED
    assert "tick=1 step=b detail=prop ob1 pending->fulfilled" in state.event_log
    # terminal propositions stay settled on later ticks
    later = tick(state)
    assert later.propositions[0].state is PropState.FULFILLED


def test_policy_threshold_picks_strong_mappings(fixture_text):
    mappings = parse_mappings(fixture_text("travel.map"))
    accepted = MergePolicy(0.85).accept(mappings)
    assert [m.mapping_id for m in accepted] == ["m2", "m4"]
    assert MergePolicy(0.0).accept(mappings)[0].mapping_id == "m2"
    with pytest.raises(ProbabilityOutOfRangeError):
        MergePolicy(1.5)


def test_tick_materializes_merge_under_policy(fixture_text):
    local = parse_ontology(fixture_text("travel_local.onto"))
    external = parse_ontology(fixture_text("travel_external.onto"))
    mappings = parse_mappings(fixture_text("travel.map"))
    state = monitor.init(local, upper_namespace="O1")
    state = tick(state, policy=MergePolicy(0.85), mappings=mappings, external_kb=external)
    assert "tick=1 step=c detail=accept m2,m4" in state.event_log
    assert state.merge_relation == frozenset(
        {
            (EntityName("O1", "Event"), EntityName("O2", "Action"), 0.9),
            (EntityName("O1", "keyword"), EntityName("O2", "about"), 0.9),
        }
    )
    answers = query(state.merged, parse_query("O1:Event(x) & O1:keyword(x, Place)"), mapped_only=True)
    assert [(a.binding[0][1].local, a.probability) for a in answers] == [("Trip", 0.81)]


def test_closures_track_new_facts_each_tick():
    state = monitor.init(base_kb(), (EVENT,))
    for n in range(1, 4):
        state = enqueue_event(state, event(n - 0.5, f"E{n}"))
    for expected in (1, 2, 3):
        state = tick(state)
        record = state.kb.closures[EVENT]
        assert record.closed_at == state.clock
        assert record.members == frozenset(entailed_members(state.kb, EVENT))
        assert len(record.members) == expected
    assert is_member(state.kb, EntityName("i", "Nothing"), EVENT) is Truth.FALSE


def test_run_is_tick_composition():
    events = [event(0.5, "E1"), event(2.5, "E3"), action(1.5, "a1")]
    base = monitor.init(base_kb(), (EVENT,))
    ran, log = monitor.run(base, 3, events=events)
    stepped = base
    for e in events:
        stepped = (
            enqueue_event(stepped, e) if isinstance(e, ABoxAssertion) else record_action(stepped, e)
        )
    for _ in range(3):
        stepped = tick(stepped)
    assert ran == stepped
    assert log == stepped.event_log
    assert ran.pending_events == () and ran.pending_actions == ()


def test_replay_rebuilds_the_same_state(fixture_text):
    from ontoflux.io import parse_events

    kb = parse_ontology(fixture_text("monitor_base.onto"))
    events = parse_events(fixture_text("monitor_script.evt"))
    closed = (EVENT, AGENT)
    final, log = monitor.run(monitor.init(kb, closed), 50, events=events)
    replayed = monitor.replay_log(log, kb, closed)
    assert replayed == final


def test_merge_completion_becomes_monitor_events():
    order = UpdateOrder(seq=3, placed_at=1.0, drawn_lead=2.0, effective_delivery=3.5, drawn_at=1.5)
    assertion, record = monitor.merge_completion_event(order, targets=("O1", "O2"))
    assert assertion == ABoxAssertion(ClassAtom(EVENT, ind("Merge_3")), 3.5)
    assert record.at == 3.5 and record.kind == EntityName("up", "MergeAction")
    assert record.actor == EntityName("i", "Merger")
    assert record.targets == ("O1", "O2")

    state = monitor.init(base_kb(), (EVENT,), upper_namespace="up")
    state = enqueue_event(state, assertion)
    state = record_action(state, record)
    for _ in range(4):
        state = tick(state)
    assert state.kb.closures[EVENT].members == frozenset({EntityName("i", "Merge_3")})
