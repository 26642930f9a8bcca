"""Corpus logging, export, splitting, and offline evaluation."""

from .evaluate import (
    SAMPLED_REPETITIONS,
    EvalReport,
    TurnGroup,
    evaluate_recall,
    format_report,
    group_turns,
    recall_csv,
)
from .records import (
    SCHEMA_VERSION,
    ConversationLog,
    TurnLog,
    export_corpus,
    export_transitions,
    read_corpus,
    read_transitions,
    write_transitions,
)
from .splits import DatasetSplit, oversample_positives, split_by_article
from .stats import CorpusStats, corpus_stats, format_stats

__all__ = [
    "SAMPLED_REPETITIONS",
    "SCHEMA_VERSION",
    "ConversationLog",
    "CorpusStats",
    "DatasetSplit",
    "EvalReport",
    "TurnGroup",
    "TurnLog",
    "corpus_stats",
    "evaluate_recall",
    "export_corpus",
    "export_transitions",
    "format_report",
    "format_stats",
    "group_turns",
    "oversample_positives",
    "read_corpus",
    "read_transitions",
    "recall_csv",
    "split_by_article",
    "write_transitions",
]
