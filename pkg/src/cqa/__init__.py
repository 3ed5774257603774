"""Static classification and range-consistent counting for self-join-free
conjunctive queries under primary-key constraints."""

from .attacks import (
    AttackGraph,
    AttackWitness,
    FrozenVariables,
    attack_graph,
    attack_graph_dot,
    attacks_variable,
    frozen_vars,
    keycl,
)
from .classify import (
    ClassificationReport,
    CyclicAttackGraphError,
    FuxmanGraph,
    IdSetViolation,
    candidate_id_set,
    fuxman_graph,
    in_cforest,
    in_cparsimony,
    is_id_set,
)
from .errors import AnalysisRefusal, CqaError, InputError
from .evaluate import (
    AnswerSet,
    CountAnswer,
    NotInCparsimonyError,
    RangeAnswer,
    certain_answers,
    count_by,
    cqacount_oracle,
    cqacount_parsimonious,
    evaluate,
    is_optimistic_repair,
    is_pessimistic_repair,
)
from .fds import (
    FunctionalDependency,
    FunctionalDependencySet,
    SequentialProof,
    fdset,
    sequential_proof,
)
from .instances import (
    DEFAULT_REPAIR_CAP,
    Block,
    DatabaseInstance,
    Fact,
    RepairSpaceOverflow,
    blocks,
    build_3dm_instance,
    enumerate_repairs,
    is_consistent,
    is_repair_of,
    load_bundle,
    repair_count,
    save_bundle,
    threedm_query,
)
from .queries import (
    Atom,
    ConjunctiveQuery,
    QueryError,
    QueryGraph,
    RelationSignature,
    Term,
    make_bound,
    make_free,
    parse_query,
    query_graph,
    serialize_query,
    substitute,
)

__version__ = "0.1.0"
