"""Temporally evolving knowledge bases, probabilistic ontology merging,
and a discrete-event comparison of sequential updating regimes."""

from .errors import (
    InvalidConfigError,
    InvalidFragmentError,
    MalformedItemError,
    MissingAxiomError,
    NamespaceClashError,
    NegativeAdjustmentError,
    NonPositiveRateError,
    OntofluxError,
    ParseError,
    ProbabilityOutOfRangeError,
    StaleEventError,
    UnresolvedNameError,
    UnsafeQueryError,
    UnsortedLogError,
)
from .kb import (
    ABoxAssertion,
    AllValuesFrom,
    Atom,
    ClassAtom,
    ClosureRecord,
    DisjointClasses,
    EntityName,
    HornRule,
    Individual,
    KnowledgeBase,
    PropertyAtom,
    PropertyDomain,
    PropertyRange,
    SubClassOf,
    Term,
    Truth,
    UnionEquivalence,
    Variable,
    Violation,
    assert_all,
    assert_item,
    check_all_values_from,
    check_disjointness,
    close_class,
    entailed_members,
    is_member,
    saturate,
)
from .mfrag import (
    ErrorKind,
    FragmentKind,
    LocalDistribution,
    MFrag,
    MTheory,
    StructuralError,
    classify_fragment,
    topological_order,
    validate_mfrag,
    validate_mtheory,
)
from .merging import (
    DerivedFact,
    Mapping,
    MergedKB,
    QueryAnswer,
    combine_noisy_or,
    complement,
    merge,
    query,
)
from .monitor import (
    MergePolicy,
    MonitorState,
    enqueue_event,
    init,
    merge_completion_event,
    record_action,
    replay_log,
    run,
    tick,
)
from .simulate import (
    Costs,
    GammaParams,
    Regime,
    SimConfig,
    SimStats,
    Simulation,
    UpdateOrder,
    adjust_exogenous,
    erlang_b,
    run_simulation,
    sample_gamma,
    sample_poisson_interarrival,
)
from .temporal import (
    ActionPattern,
    ActionRecord,
    Instant,
    Interval,
    Polarity,
    PropState,
    TemporalKind,
    TemporalProposition,
    classify,
    step_all,
    step_proposition,
    upper_ontology,
    validate_upper_ontology,
)

__version__ = "0.1.0"
