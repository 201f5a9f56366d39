"""Rank-agreement analytics for benchmark score matrices.

Quantifies how well model rankings transfer between benchmarks:
significance-aware Kendall correlations, partial-order ranking alignment
that shows only statistically significant rank changes, PCA of the
model-score matrix, pre-training compute accounting, and a latent-factor
simulator contrasting direct evaluation with train-before-test.
"""

__version__ = "0.1.0"

from .alignment import (
    AlignedRanking,
    AlignmentError,
    PartialOrder,
    build_partial_order,
    crossing_count,
    parallel_greedy_rank,
    rank_models,
    vanilla_ranks,
)
from .core import (
    CATEGORIES,
    DEGENERATE,
    AgreementMatrix,
    BenchmarkRecord,
    Degenerate,
    DegenerateError,
    ModelRecord,
    ScoreMatrix,
    ScoreMatrixError,
    make_score_matrix,
    oriented_scores,
    validate_score_matrix,
)
from .io import (
    LoadError,
    RunManifest,
    load_artifact,
    load_benchmark_categories,
    load_model_metadata,
    load_scores,
    save_scores,
)
from .lowrank import (
    ComputeRecord,
    PcaResult,
    compute_flops,
    explained_variance_share,
    fit_pca,
    pc1_compute_correlation,
)
from .rankstats import (
    CategoryAgreement,
    MeanAgreement,
    SignificanceConfig,
    TieError,
    agreement_matrix,
    average_rank_vector,
    bits_per_byte,
    category_agreement,
    kendall_tau,
    kendall_tau_b,
    mean_agreement,
    significant_difference,
)
from .synth import PairedSummary, SyntheticConfig, generate, paired_experiment

__all__ = [
    "__version__",
    "AgreementMatrix",
    "AlignedRanking",
    "AlignmentError",
    "BenchmarkRecord",
    "CATEGORIES",
    "CategoryAgreement",
    "ComputeRecord",
    "DEGENERATE",
    "Degenerate",
    "DegenerateError",
    "LoadError",
    "MeanAgreement",
    "ModelRecord",
    "PairedSummary",
    "PartialOrder",
    "PcaResult",
    "RunManifest",
    "ScoreMatrix",
    "ScoreMatrixError",
    "SignificanceConfig",
    "SyntheticConfig",
    "TieError",
    "agreement_matrix",
    "average_rank_vector",
    "bits_per_byte",
    "build_partial_order",
    "category_agreement",
    "compute_flops",
    "crossing_count",
    "explained_variance_share",
    "fit_pca",
    "generate",
    "kendall_tau",
    "kendall_tau_b",
    "load_artifact",
    "load_benchmark_categories",
    "load_model_metadata",
    "load_scores",
    "make_score_matrix",
    "mean_agreement",
    "oriented_scores",
    "paired_experiment",
    "parallel_greedy_rank",
    "pc1_compute_correlation",
    "rank_models",
    "save_scores",
    "significant_difference",
    "validate_score_matrix",
    "vanilla_ranks",
]
