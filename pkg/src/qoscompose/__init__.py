"""QoS-aware service composition over task DAGs.

Candidates are min-max scaled, leveled by an associative classifier trained
against the user's requested ranges, scored into utilities, and selected
greedily along the plan's semantic links with a one-swap alternative and an
availability-replacement rule.
"""

from .cba import (
    Classifier,
    ClassAssociationRule,
    Item,
    MiningConfig,
    TrainingInstance,
    build_classifier,
    discretize,
    mine_cars,
    predict,
    sort_rules,
)
from .composer import (
    CompositeService,
    CompositionPlan,
    QueueEntry,
    SearchGraph,
    build_search_graph,
    compose,
    compose_with_graph,
    composite_report,
    first_alternative,
    rank_candidates,
    replace_unavailable,
)
from .data_io import (
    EngineConfig,
    Registry,
    RegistryRecord,
    default_config,
    default_request,
    generate_synthetic,
    load_classifier,
    load_config,
    load_plan,
    load_registry,
    load_taxonomy,
    load_training_set,
    save_classifier,
    save_config,
    save_plan,
    save_registry,
    save_taxonomy,
    save_training_set,
)
from .errors import EngineError
from .leveling import (
    LevelScheme,
    ScoredService,
    UserRequest,
    classify_candidates,
    compute_utility,
    default_scheme,
    filter_eligible,
    score_candidates,
    synthesize_training_set,
)
from .ontology import (
    MatchType,
    SemanticLink,
    Taxonomy,
    link_quality,
    match_type,
    matching_quality,
    precompute_matches,
)
from .qos import (
    AttributeExtremes,
    NormalizedQoSVector,
    Polarity,
    QoSAttribute,
    QoSVector,
    compute_extremes,
    normalize,
    scale,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeExtremes",
    "ClassAssociationRule",
    "Classifier",
    "CompositeService",
    "CompositionPlan",
    "EngineConfig",
    "EngineError",
    "Item",
    "LevelScheme",
    "MatchType",
    "MiningConfig",
    "NormalizedQoSVector",
    "Polarity",
    "QoSAttribute",
    "QoSVector",
    "QueueEntry",
    "Registry",
    "RegistryRecord",
    "ScoredService",
    "SearchGraph",
    "SemanticLink",
    "Taxonomy",
    "TrainingInstance",
    "UserRequest",
    "build_classifier",
    "build_search_graph",
    "classify_candidates",
    "compose",
    "compose_with_graph",
    "composite_report",
    "compute_extremes",
    "compute_utility",
    "default_config",
    "default_request",
    "default_scheme",
    "discretize",
    "filter_eligible",
    "first_alternative",
    "generate_synthetic",
    "link_quality",
    "load_classifier",
    "load_config",
    "load_plan",
    "load_registry",
    "load_taxonomy",
    "load_training_set",
    "match_type",
    "matching_quality",
    "mine_cars",
    "normalize",
    "precompute_matches",
    "predict",
    "rank_candidates",
    "replace_unavailable",
    "save_classifier",
    "save_config",
    "save_plan",
    "save_registry",
    "save_taxonomy",
    "save_training_set",
    "scale",
    "score_candidates",
    "sort_rules",
    "synthesize_training_set",
]
