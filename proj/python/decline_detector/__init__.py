"""Python bindings for the decline detector core."""

from ._core import (
    build_npms_baseline,
    classify,
    cli,
    compare_semver,
    fit_trend,
    metrics_from_counts,
    ndcg,
    pagerank,
    rank_scores,
    roc_auc,
    spearman,
)

__all__ = [
    "build_npms_baseline",
    "classify",
    "cli",
    "compare_semver",
    "fit_trend",
    "metrics_from_counts",
    "ndcg",
    "pagerank",
    "rank_scores",
    "roc_auc",
    "spearman",
]
