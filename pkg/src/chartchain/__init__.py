"""Synthetic chart question-answering data built from executable function
chains: chart records in, verified question/rationale/answer triples out."""

from .engine import (
    ChainStep,
    DiscoveryConfig,
    FunctionChain,
    TypedAnswer,
    apply_object_function,
    apply_value_function,
    build_chain,
    chain_signature,
    classify_question_type,
    discover,
    discover_chains,
    execute_chain,
    parse_signature,
    select_objects,
)
from .evaluate import (
    EvalReport,
    Prediction,
    extract_answer,
    majority_vote,
    parse_answer_marker,
    relaxed_match,
    score_dataset,
)
from .forge import (
    GenConfig,
    SpecSkeleton,
    evolve_spec,
    fallback_generate,
    generate_seed,
    sample_skeleton,
)
from .gateway import (
    Gateway,
    GatewayPolicy,
    GatewayRequest,
    HttpGateway,
    MockGateway,
    mock_from_fixture,
    prompt_hash,
)
from .model import (
    CHART_TYPES,
    REGULAR_TYPES,
    ChartObject,
    ChartSpec,
    objects_of,
    parse_spec,
    serialize,
    validate_spec,
)
from .pipeline import (
    PipelineConfig,
    StatsTable,
    build_dataset,
    compute_stats,
    split_dataset,
)
from .registry import ChainState, Condition, FunctionDef, applicable, catalog, lookup, taxonomy_of
from .synthesis import (
    CoTRecord,
    ProcessDescription,
    consistency_filter,
    describe_chain,
    draft_question,
    draft_rationale,
    refine_rationale,
    synthesize_record,
)

__version__ = "0.1.0"
