"""Deterministic synthetic fixtures shared by the test suite.

Everything is seeded: building the same fixture twice yields byte-identical
pool directories and sidecars.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from curate.records import EmbeddingMatrix, MetadataRecord, Pool
from curate.shardio import write_embeddings, write_pool

# roughly one third English, like a raw web crawl
LANGUAGES = (
    ("eng_Latn", 0.34),
    ("spa_Latn", 0.13),
    ("fra_Latn", 0.11),
    ("deu_Latn", 0.10),
    ("jpn_Jpan", 0.08),
    ("rus_Cyrl", 0.08),
    ("zho_Hans", 0.06),
    ("tur_Latn", 0.05),
    ("por_Latn", 0.05),
)


def make_uid(token) -> str:
    return hashlib.md5(str(token).encode("utf-8")).hexdigest()


def make_records(n: int, seed: int = 42, score_names=("dfn_raw", "dfn_translated")) -> list[MetadataRecord]:
    rng = np.random.default_rng(seed)
    names = [lang for lang, _ in LANGUAGES]
    weights = np.array([w for _, w in LANGUAGES])
    weights = weights / weights.sum()
    langs = rng.choice(names, size=n, p=weights)
    records = []
    for i in range(n):
        uid = make_uid(f"{seed}:{i}")
        scores = {
            name: float(np.clip(rng.normal(0.3, 0.15), -1.0, 1.0)) for name in score_names
        }
        records.append(
            MetadataRecord(
                uid=uid,
                raw_caption=f"caption {i} in {langs[i]}",
                url=f"http://example.test/{uid}",
                language=str(langs[i]),
                translated_caption=f"translated caption {i}",
                scores=scores,
                embedding_refs={"image_dfn": i, "text_dfn_raw": i, "text_dfn_translated": i},
            )
        )
    return records


def make_pool(n: int, seed: int = 42, **kwargs) -> Pool:
    return Pool.from_records(make_records(n, seed, **kwargs), provenance=f"fixture seed={seed}")


def build_fixture_dir(directory: Path, n: int = 1000, seed: int = 42, dim: int = 16) -> Path:
    """Pool directory plus embedding sidecars for the three spaces the records
    reference, with row index == record index."""
    directory = Path(directory)
    records = make_records(n, seed)
    pool = Pool.from_records(records, provenance=f"fixture seed={seed}")
    write_pool(pool, directory)
    rng = np.random.default_rng(seed + 1)
    # text embeddings correlate with image embeddings so cosine scores spread
    image = rng.normal(size=(n, dim)).astype(np.float32)
    noise_raw = rng.normal(size=(n, dim)).astype(np.float32)
    noise_tr = rng.normal(size=(n, dim)).astype(np.float32)
    for name, rows in (
        ("image_dfn", image),
        ("text_dfn_raw", 0.6 * image + 0.8 * noise_raw),
        ("text_dfn_translated", 0.7 * image + 0.7 * noise_tr),
    ):
        matrix = EmbeddingMatrix(space_name=name, rows=rows.astype(np.float32))
        write_embeddings(matrix, directory / f"{name}.emb")
    return directory


def write_sidecar(path: Path, name: str, rows: np.ndarray, index=None) -> Path:
    write_embeddings(EmbeddingMatrix(space_name=name, rows=rows, index=index), path)
    return path
