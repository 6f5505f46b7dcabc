"""Cosine-similarity quality scores between image and text embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OperationError
from .records import EmbeddingMatrix, MetadataRecord, Pool

#: Rounding can push |dot/(|u||v|)| a hair past 1; clamp so attached scores
#: always pass record validation.
def _clamp(value: float) -> float:
    return -1.0 if value < -1.0 else (1.0 if value > 1.0 else value)


@dataclass(frozen=True)
class ScoreSpec:
    """Names the score to attach and the two embedding spaces that produce it."""

    score_name: str
    image_space: str
    text_space: str


def cosine(u, v) -> float:
    """Cosine similarity with float64 accumulation, clamped to [-1, 1].

    Bitwise-identical vectors score exactly 1.0. Zero-norm vectors are an
    error, not score 0: they indicate upstream embedding failure.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise OperationError(f"cosine: dimension mismatch {u.shape} vs {v.shape}")
    if np.array_equal(u, v):
        if not u.any():
            raise OperationError("cosine: zero-norm vector")
        return 1.0
    dot = float(np.dot(u, v))
    nu = float(np.dot(u, u))
    nv = float(np.dot(v, v))
    if nu == 0.0 or nv == 0.0:
        raise OperationError("cosine: zero-norm vector")
    return _clamp(dot / (math.sqrt(nu) * math.sqrt(nv)))


def cosine_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cosines of aligned row pairs; same conventions as `cosine`."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise OperationError(f"cosine: dimension mismatch {a.shape} vs {b.shape}")
    dots, na, nb = kernels.cosine_pairs(a, b)
    zero = (na == 0.0) | (nb == 0.0)
    if zero.any():
        raise OperationError(f"cosine: zero-norm vector at row {int(np.flatnonzero(zero)[0])}")
    out = np.clip(dots / (np.sqrt(na) * np.sqrt(nb)), -1.0, 1.0)
    equal = np.all(np.asarray(a, dtype=np.float64) == np.asarray(b, dtype=np.float64), axis=1)
    out[equal] = 1.0
    return out


def attach_scores(
    pool: Pool,
    spec: ScoreSpec,
    image_matrix: EmbeddingMatrix,
    text_matrix: EmbeddingMatrix,
) -> Pool:
    """Set scores[spec.score_name] on every record from its embedding pair.

    A pure per-record map (applied lazily shard by shard): output order and
    content are independent of processing order, and re-attaching the same
    spec is idempotent.
    """
    if image_matrix.dimension != text_matrix.dimension:
        raise OperationError(
            f"dimension mismatch between sidecars {spec.image_space!r} "
            f"({image_matrix.dimension}) and {spec.text_space!r} ({text_matrix.dimension})"
        )

    image_rows = image_matrix.rows
    text_rows = text_matrix.rows

    def ref_of(rec: MetadataRecord, space: str, bound: int) -> int:
        try:
            ref = rec.embedding_refs[space]
        except KeyError:
            raise OperationError(f"record {rec.uid} missing embedding_ref {space!r}") from None
        if not 0 <= ref < bound:
            raise OperationError(f"record {rec.uid}: ref {ref} out of bounds for {space!r}")
        return ref

    def score_shard(recs):
        if not recs:
            return recs
        i_refs = [ref_of(rec, spec.image_space, len(image_rows)) for rec in recs]
        t_refs = [ref_of(rec, spec.text_space, len(text_rows)) for rec in recs]
        try:
            values = cosine_rows(image_rows[i_refs], text_rows[t_refs])
        except OperationError as exc:
            # Re-run one at a time so the error names the offending record.
            for rec, i_ref, t_ref in zip(recs, i_refs, t_refs):
                try:
                    cosine(image_rows[i_ref], text_rows[t_ref])
                except OperationError as inner:
                    raise OperationError(f"record {rec.uid}: {inner}") from None
            raise exc
        return tuple(
            rec.with_score(spec.score_name, float(value)) for rec, value in zip(recs, values)
        )

    provenance = pool.provenance
    note = f"score {spec.score_name}={spec.image_space}x{spec.text_space}"
    provenance = f"{provenance}; {note}" if provenance else note
    return pool.map_shards(score_shard, provenance=provenance)
