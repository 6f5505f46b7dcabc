"""Curation toolkit for web-scale image-text metadata pools: score-based
top-x% selection, baseline subset composition, and distribution-gap analyses,
operating purely on metadata records and embedding sidecars.
"""

from .composition import (
    CompositionReport,
    concat_both_captions,
    replace_captions,
    run_recipe,
    union_prefer_translated,
)
from .errors import CurateError, FormatError, OperationError, UsageError, ValidationError
from .kernels import BACKEND
from .poolstats import CompositionStats, composition_delta, language_composition, overlap
from .records import (
    CompositionRecipe,
    EmbeddingMatrix,
    MetadataRecord,
    Pool,
    ShardDescriptor,
    Violation,
    validate_pool,
    validate_record,
)
from .scoring import ScoreSpec, attach_scores, cosine
from .selection import SelectionReport, select_top, target_count, threshold_of
from .shardio import Manifest, read_embeddings, read_pool, write_embeddings, write_pool

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CompositionRecipe",
    "CompositionReport",
    "CompositionStats",
    "CurateError",
    "EmbeddingMatrix",
    "FormatError",
    "Manifest",
    "MetadataRecord",
    "OperationError",
    "Pool",
    "ScoreSpec",
    "SelectionReport",
    "ShardDescriptor",
    "UsageError",
    "ValidationError",
    "Violation",
    "attach_scores",
    "composition_delta",
    "concat_both_captions",
    "cosine",
    "language_composition",
    "overlap",
    "read_embeddings",
    "read_pool",
    "replace_captions",
    "run_recipe",
    "select_top",
    "target_count",
    "threshold_of",
    "union_prefer_translated",
    "validate_pool",
    "validate_record",
    "write_embeddings",
    "write_pool",
]
