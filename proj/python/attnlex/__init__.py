"""Python bindings for the attnlex C++ core."""

from ._core import (
    DataError,
    UsageError,
    __version__,
    analyze,
    collapse_tokens,
    generate_synthetic,
    kl_divergence,
    lexicon_stats,
    merge_lexicons,
    received_attention,
    render_table,
    wilcoxon_signed_rank,
)

__all__ = [
    "DataError",
    "UsageError",
    "__version__",
    "analyze",
    "collapse_tokens",
    "generate_synthetic",
    "kl_divergence",
    "lexicon_stats",
    "merge_lexicons",
    "received_attention",
    "render_table",
    "wilcoxon_signed_rank",
]
