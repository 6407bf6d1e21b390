"""View-driven record deduplication with active learning.

The library cleans duplicate records in a dataset as seen through a user's
views: each record is scored by how much its removal changes the view
(earth mover's distance between view results), an active-learning loop
asks a labeler only about high-impact candidate pairs, and cleaning stops
once the view stops changing.
"""

from .classifier import (
    EnsembleScore,
    LabeledPair,
    Model,
    Prediction,
    ensemble_scores,
    f1_on_holdout,
    predict,
    train,
)
from .distance import (
    DistanceConfig,
    attribute_distance,
    converged,
    tuple_distance,
    view_distance,
    view_distance_with_flow,
    view_impact_scores,
)
from .engine import (
    Aggregation,
    Candidates,
    CleaningConfig,
    CleaningSession,
    DashboardSpec,
    SessionState,
    Strategy,
    dashboard_pair_scores,
    oracle_labeler,
    pair_scores,
    prepare_candidates,
    run_cleaning,
    select_baseline,
    select_bias,
    select_hybrid,
    select_top,
    start_session,
)
from .errors import ConfigError, DataError, EvaluationError, LabelingAborted, ViewCleanError
from .pairs import (
    BlockingRule,
    FeatureDef,
    Threshold,
    apply_blocking,
    build_pairs,
    compute_features,
    similarity,
)
from .relation import (
    AttributeType,
    GroundTruth,
    PairKey,
    Record,
    Relation,
    apply_dedup,
    load_ground_truth,
    load_relation,
    pair_key,
)
from .synth import generate_synthetic
from .views import (
    Aggregate,
    BinExpr,
    Predicate,
    ViewResult,
    ViewSpec,
    evaluate,
    load_view_specs,
    provenance,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
