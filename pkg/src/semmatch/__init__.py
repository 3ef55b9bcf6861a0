"""Taxonomy-backed schema matchmaking with half/full agreements.

The package matches peer export schemas against a shared common
ontology (phase 1), relates peers through the resulting half agreements
(phase 2), scores mappings against gold standards, and simulates the
publish / request / bind discovery protocol on a super-peer overlay.
"""

from .agreement import (
    DEFAULT_PHASE_TWO,
    FullAgreement,
    MappingLink,
    PeerMatchResult,
    PhaseTwoConfig,
    compare_half_agreements,
    compose,
)
from .errors import (
    ParseError,
    SemmatchError,
    TickLimitExceeded,
    UnknownRefError,
    ValidationError,
)
from .evaluation import (
    EvalReport,
    GoldMapping,
    evaluate,
    load_gold,
    loads_gold,
    produced_pairs,
    threshold_sweep,
    validate_gold_refs,
)
from .matcher import (
    DEFAULT_CONFIG,
    AgreementUnit,
    HalfAgreement,
    MatchConfig,
    VERDICT_EXACT,
    VERDICT_NON_SIMILAR,
    VERDICT_SIMILAR,
    build_half_agreement,
    classify,
    external_similarity,
    internal_similarity,
    label_similarity,
    score_endpoints,
    tokenize_label,
)
from .p2psim import (
    SUPER_PEER_ID,
    PeerNode,
    ScenarioRun,
    SimConfig,
    SimEvent,
    SuperPeer,
    World,
    events_to_jsonl,
    parse_scenario,
    run_scenario,
)
from .schema import (
    Attribute,
    Concept,
    KIND_COMMON,
    KIND_EXPORT,
    Schema,
    load_schema,
    loads_schema,
)
from .taxonomy import (
    MEASURES,
    PATH,
    SenseSimilarity,
    Synset,
    Taxonomy,
    WUP,
    load_taxonomy,
    loads_taxonomy,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementUnit",
    "Attribute",
    "Concept",
    "DEFAULT_CONFIG",
    "DEFAULT_PHASE_TWO",
    "EvalReport",
    "FullAgreement",
    "GoldMapping",
    "HalfAgreement",
    "KIND_COMMON",
    "KIND_EXPORT",
    "MEASURES",
    "MappingLink",
    "MatchConfig",
    "PATH",
    "ParseError",
    "PeerMatchResult",
    "PeerNode",
    "PhaseTwoConfig",
    "ScenarioRun",
    "Schema",
    "SemmatchError",
    "SenseSimilarity",
    "SimConfig",
    "SimEvent",
    "SUPER_PEER_ID",
    "SuperPeer",
    "Synset",
    "Taxonomy",
    "TickLimitExceeded",
    "UnknownRefError",
    "VERDICT_EXACT",
    "VERDICT_NON_SIMILAR",
    "VERDICT_SIMILAR",
    "ValidationError",
    "WUP",
    "World",
    "build_half_agreement",
    "classify",
    "compare_half_agreements",
    "compose",
    "evaluate",
    "events_to_jsonl",
    "external_similarity",
    "internal_similarity",
    "label_similarity",
    "load_gold",
    "load_schema",
    "load_taxonomy",
    "loads_gold",
    "loads_schema",
    "loads_taxonomy",
    "parse_scenario",
    "produced_pairs",
    "run_scenario",
    "score_endpoints",
    "threshold_sweep",
    "tokenize_label",
    "validate_gold_refs",
]
