"""Evaluation toolkit for lexical semantic change detection.

Builds word usage graphs from annotated usage pairs, clusters them with
correlation clustering, derives change predictions (Jensen-Shannon
distance, sense gain/loss, COMPARE, APD and friends) and scores them with
the standard task metrics, all under seeded, reproducible configurations.
"""

from .bench import EvalReport, RunConfig, run, sample_uses
from .clustering import (
    ClusteringParams,
    brute_force_cluster,
    clustering_loss,
    correlation_cluster,
)
from .errors import (
    ConfigError,
    CorruptStoreError,
    DataFormatError,
    DegenerateInputError,
    IngestionError,
    LscdEvalError,
    StructuralError,
    UndefinedMetricError,
)
from .fixture import FixtureSpec, make_fixture
from .ingest import (
    DatasetManifest,
    GoldLabels,
    Split,
    load_manifest,
    load_split,
    make_split,
    parse_clusters,
    parse_gold_lscd,
    parse_judgments,
    parse_uses,
)
from .measures import (
    BinaryChange,
    ChangeScores,
    SenseDistribution,
    apd,
    apd_thresholded,
    binary_change,
    compare_from_clusters,
    cos_prototype,
    diasense,
    jsd_distance,
    sense_distribution,
)
from .metrics import (
    F1Result,
    PairedSeries,
    adjusted_rand_index,
    f1_binary,
    krippendorff_alpha_ordinal,
    pearson,
    spearman,
)
from .store import (
    EmbeddingRecord,
    PoolingSpec,
    aggregate_layers,
    pool_subwords,
    read_store,
    usage_vector,
    write_store,
)
from .wic import (
    PairScore,
    ThresholdSpec,
    discretize,
    generate_pairs,
    load_external_scores,
    score_pairs_from_embeddings,
    vector_distance,
)
from .wug import (
    EdgeData,
    Judgment,
    SenseClustering,
    Usage,
    UsagePair,
    WordUsageGraph,
    build_graph,
    build_graph_from_scores,
    edge_weight,
    subgraph_by_grouping,
)

__version__ = "0.1.0"
