"""Memorization audit harness for text-to-image backends (C++ core)."""

from ._memaudit import (
    Corpus,
    MemauditError,
    MockBackend,
    Records,
    __version__,
    cosine_similarity,
    mine,
    pearson,
    percent2,
    recommend_strategy,
    render_prompt,
    run_audit,
    strategies,
    template_digests,
    top_k_similar,
)

__all__ = [
    "Corpus",
    "MemauditError",
    "MockBackend",
    "Records",
    "cosine_similarity",
    "mine",
    "pearson",
    "percent2",
    "recommend_strategy",
    "render_prompt",
    "run_audit",
    "strategies",
    "template_digests",
    "top_k_similar",
]
