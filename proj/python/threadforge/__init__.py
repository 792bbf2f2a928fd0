"""Python access to the threadforge core library and command-line pipeline."""

from ._threadforge import (
    DataError,
    PreprocessedText,
    ShapeError,
    UsageError,
    compute_metrics,
    influence_weights,
    is_keyword,
    load_candidate_table,
    load_embedding_table,
    load_threads,
    normalize_tweet,
    plan_oversample,
    run,
    save_candidate_table,
    save_embedding_table,
    text_key,
    text_key_of_tokens,
)

__all__ = [
    "DataError",
    "PreprocessedText",
    "ShapeError",
    "UsageError",
    "compute_metrics",
    "influence_weights",
    "is_keyword",
    "load_candidate_table",
    "load_embedding_table",
    "load_threads",
    "normalize_tweet",
    "plan_oversample",
    "run",
    "save_candidate_table",
    "save_embedding_table",
    "text_key",
    "text_key_of_tokens",
]
