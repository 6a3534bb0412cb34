"""Analogues-search anomaly detection for directional-drilling telemetry.

The current drilling state is compared against a database of past accident
"lessons": 2-hour MWD windows are reduced to aggregated statistics, pairs of
windows are scored by a gradient-boosted tree classifier, and high-scoring
analogues raise typed alarms. The package also ships the evaluation,
clustering, and distortion-robustness harnesses plus a seeded synthetic
telemetry generator that makes every experiment reproducible at desk scale.
"""

from .telemetry import (
    CANONICAL_CHANNELS,
    ChannelId,
    Interval,
    TelemetryError,
    TelemetrySeries,
    missing_fraction,
    parse_csv,
    slice_interval,
    write_csv,
)
from .features import (
    STATISTICS,
    WindowConfig,
    interval_features,
    pair_features,
    window_stats,
)
from .gbdt import GbdtModel, TrainConfig, deserialize, fit, predict_score, serialize
from .synthgen import (
    TABLE1_COMPOSITION,
    AccidentType,
    GroundTruthEvent,
    OperationType,
    SyntheticCorpus,
    WellPlan,
    generate_corpus,
    generate_well,
    save_corpus,
)
from .lessons import (
    Lesson,
    LessonDatabase,
    build_pair_dataset,
    database_from_corpus,
    extract_lesson_interval,
    ground_truth_similar,
    load_manifest,
    save_manifest,
)
from .detector import (
    Alarm,
    DetectorConfig,
    SimilarityModel,
    max_similarity,
    rank_analogues,
    replay,
    replay_trace,
    score_pair,
    top5_vote,
)
from .evaluation import (
    AlarmScoreReport,
    ConfusionMatrix,
    CvConfig,
    confusion_at,
    cross_validate,
    false_alarms_per_day,
    pr_auc,
    pr_curve,
    roc_auc,
    roc_curve,
    score_alarms,
    threshold_sweep,
)
from .clustering import (
    Dendrogram,
    SimilarityMatrix,
    agglomerate,
    cut,
    ground_truth_matrix,
    model_matrix,
    purity,
    unsupervised_l1_matrix,
)
from .robustness import (
    DistortionSpec,
    SimilarityDistribution,
    bootstrap_std,
    distort,
    r_metric,
    similarity_distributions,
    smooth_noise_curve,
)

__version__ = "0.1.0"
