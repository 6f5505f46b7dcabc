"""Bit-exact pool and embedding-sidecar formats.

Pool directory layout:
    manifest.json        written last, so readers never observe a manifest
                         that references incomplete shards
    shard-000000.jsonl   one JSON object per line, uid-sorted

Record lines carry the keys (in this order, absent optionals omitted):
    uid, url, text, language, translated_text, backtranslated_text,
    caption_source, scores, embedding_refs
`text` is the raw web-crawled caption; `caption_source` is omitted when "raw".
Score and ref objects are written with sorted keys so serialization is
byte-deterministic regardless of construction history.

Embedding sidecar (little-endian):
    magic "EMB1" | u32 dimension | u64 row count | u32 name length | name UTF-8
    then row-major float32 payload. A companion "<path>.uids" file maps uid to
    row as sorted fixed-width lines ("<32-hex uid> <20-digit row>").
"""

from __future__ import annotations

import json
import logging
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .records import (
    EmbeddingMatrix,
    MetadataRecord,
    Pool,
    ShardDescriptor,
    record_sort_key,
    validate_record,
)

log = logging.getLogger("curate.shardio")

MANIFEST_NAME = "manifest.json"
MANIFEST_FORMAT = "curate-pool-v1"
SHARD_TEMPLATE = "shard-%06d.jsonl"
DEFAULT_SHARD_SIZE = 10_000
SHARD_SIZE_ENV = "CURATE_SHARD_SIZE"

SIDECAR_MAGIC = b"EMB1"

_RECORD_KEYS = (
    "uid",
    "url",
    "text",
    "language",
    "translated_text",
    "backtranslated_text",
    "caption_source",
    "scores",
    "embedding_refs",
)


def shard_size_default() -> int:
    raw = os.environ.get(SHARD_SIZE_ENV)
    if raw is None:
        return DEFAULT_SHARD_SIZE
    try:
        size = int(raw)
    except ValueError:
        raise ValidationError(f"{SHARD_SIZE_ENV} must be an integer, got {raw!r}")
    if size < 1:
        raise ValidationError(f"{SHARD_SIZE_ENV} must be positive, got {size}")
    return size


# ---------------------------------------------------------------------------
# record lines


def record_to_line(record: MetadataRecord) -> str:
    obj: dict = {"uid": record.uid}
    if record.url is not None:
        obj["url"] = record.url
    obj["text"] = record.raw_caption
    if record.language is not None:
        obj["language"] = record.language
    if record.translated_caption is not None:
        obj["translated_text"] = record.translated_caption
    if record.backtranslated_caption is not None:
        obj["backtranslated_text"] = record.backtranslated_caption
    if record.caption_source != "raw":
        obj["caption_source"] = record.caption_source
    if record.scores:
        obj["scores"] = {k: record.scores[k] for k in sorted(record.scores)}
    if record.embedding_refs:
        obj["embedding_refs"] = {
            k: record.embedding_refs[k] for k in sorted(record.embedding_refs)
        }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def record_from_obj(obj: dict) -> MetadataRecord:
    """Build a record from a parsed JSON object; uid case is normalized here
    (ingest boundary) so that all in-memory uids are canonical lowercase."""
    if not isinstance(obj, dict):
        raise ValueError("record line is not a JSON object")
    unknown = set(obj) - set(_RECORD_KEYS)
    if unknown:
        raise ValueError(f"unknown record keys: {sorted(unknown)}")
    if "uid" not in obj or "text" not in obj:
        raise ValueError("record line missing required keys uid/text")
    uid = obj["uid"]
    if not isinstance(uid, str):
        raise ValueError("uid must be a string")
    scores = obj.get("scores", {})
    refs = obj.get("embedding_refs", {})
    if not isinstance(scores, dict) or not isinstance(refs, dict):
        raise ValueError("scores/embedding_refs must be JSON objects")
    return MetadataRecord(
        uid=uid.lower(),
        raw_caption=obj["text"],
        url=obj.get("url"),
        language=obj.get("language"),
        translated_caption=obj.get("translated_text"),
        backtranslated_caption=obj.get("backtranslated_text"),
        caption_source=obj.get("caption_source", "raw"),
        scores=scores,
        embedding_refs=refs,
    )


def _parse_shard_line(line: str) -> MetadataRecord:
    record = record_from_obj(json.loads(line))
    violations = validate_record(record)
    if violations:
        raise ValueError("; ".join(str(v) for v in violations))
    return record


# ---------------------------------------------------------------------------
# manifest


@dataclass(frozen=True)
class Manifest:
    multiset: bool
    provenance: str
    shards: tuple[ShardDescriptor, ...]

    @property
    def record_count(self) -> int:
        return sum(d.record_count for d in self.shards)


def _manifest_to_json(manifest: Manifest) -> str:
    obj = {
        "format": MANIFEST_FORMAT,
        "multiset": manifest.multiset,
        "provenance": manifest.provenance,
        "record_count": manifest.record_count,
        "shards": [
            {
                "path": d.path,
                "record_count": d.record_count,
                "first_uid": d.first_uid,
                "last_uid": d.last_uid,
                "crc32": d.crc32,
            }
            for d in manifest.shards
        ],
    }
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def read_manifest(directory: str | Path) -> Manifest:
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.is_file():
        raise FormatError(f"missing manifest: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed manifest: {exc}") from exc
    if obj.get("format") != MANIFEST_FORMAT:
        raise FormatError(f"{path}: unknown manifest format {obj.get('format')!r}")
    shards = []
    for entry in obj.get("shards", []):
        try:
            shards.append(
                ShardDescriptor(
                    path=entry["path"],
                    record_count=int(entry["record_count"]),
                    first_uid=entry["first_uid"],
                    last_uid=entry["last_uid"],
                    crc32=entry.get("crc32"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: malformed shard entry: {entry!r}") from exc
    multiset = bool(obj.get("multiset", False))
    prev = None
    for d in shards:
        if d.first_uid > d.last_uid:
            raise FormatError(f"{path}: shard {d.path}: first_uid > last_uid")
        if prev is not None:
            if d.first_uid < prev.last_uid or (not multiset and d.first_uid <= prev.last_uid):
                raise FormatError(f"{path}: shards {prev.path} and {d.path} out of uid order")
        prev = d
    return Manifest(multiset=multiset, provenance=obj.get("provenance", ""), shards=tuple(shards))


# ---------------------------------------------------------------------------
# pool reading


def _load_shard(
    directory: Path,
    descriptor: ShardDescriptor,
    multiset: bool,
    verify_checksum: bool,
    invalid_handler: Callable[[str, int, str], None] | None = None,
) -> tuple[MetadataRecord, ...]:
    """Load and validate one shard. Malformed lines abort unless an
    ``invalid_handler(path, lineno, message)`` is given, which skips them."""
    path = directory / descriptor.path
    if not path.is_file():
        raise FormatError(f"missing shard: {path}")
    data = path.read_bytes()
    if verify_checksum and descriptor.crc32 is not None:
        crc = zlib.crc32(data)
        if crc != descriptor.crc32:
            raise FormatError(
                f"shard checksum mismatch: {path} (expected {descriptor.crc32}, got {crc})"
            )
    records: list[MetadataRecord] = []
    skipped = 0
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not raw:
            continue
        try:
            records.append(_parse_shard_line(raw))
        except (ValueError, ValidationError) as exc:
            if invalid_handler is not None:
                skipped += 1
                invalid_handler(str(path), lineno, str(exc))
                continue
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    if len(records) + skipped != descriptor.record_count:
        raise FormatError(
            f"{path}: manifest declares {descriptor.record_count} records, "
            f"found {len(records) + skipped}"
        )
    prev_key = None
    prev_uid = None
    run = 0
    for rec in records:
        key = record_sort_key(rec)
        if prev_key is not None and key < prev_key:
            raise FormatError(f"{path}: records not sorted at uid {rec.uid}")
        if rec.uid == prev_uid:
            run += 1
            if not multiset:
                raise FormatError(f"{path}: duplicate uid {rec.uid} in single-copy pool")
            if run >= 2:
                raise FormatError(f"{path}: uid {rec.uid} appears more than twice")
        else:
            prev_uid = rec.uid
            run = 0
        prev_key = key
    return tuple(records)


def read_pool(
    directory: str | Path,
    *,
    skip_invalid: bool = False,
    verify_checksums: bool = True,
) -> Pool:
    """Open a pool directory. Shard contents load lazily: format and
    validation errors for a shard surface when that shard is first iterated.
    With ``skip_invalid`` malformed lines are counted and logged instead of
    aborting (web metadata is dirty)."""
    directory = Path(directory)
    manifest = read_manifest(directory)

    handler = None
    if skip_invalid:

        def handler(path: str, lineno: int, message: str) -> None:
            log.warning("%s:%d: skipping invalid record: %s", path, lineno, message)

    def make_loader(descriptor: ShardDescriptor) -> Callable[[], tuple[MetadataRecord, ...]]:
        return lambda: _load_shard(
            directory, descriptor, manifest.multiset, verify_checksums, handler
        )

    shards = tuple((d, make_loader(d)) for d in manifest.shards)
    return Pool(shards, provenance=manifest.provenance, multiset=manifest.multiset)


@dataclass(frozen=True)
class PoolScan:
    """Outcome of a full offline validation scan of a pool directory."""

    record_count: int
    shard_count: int
    invalid_count: int
    errors: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors and self.invalid_count == 0


def scan_pool(directory: str | Path, *, verify_checksums: bool = True) -> PoolScan:
    """Validate every shard of a pool, collecting problems instead of aborting.

    Structural problems (missing shard, checksum, ordering) are reported once
    per shard; malformed lines are reported individually.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    errors: list[str] = []
    invalid = 0
    records = 0
    prev_last_uid: str | None = None
    prev_tail_run = 0
    for descriptor in manifest.shards:
        shard_invalid = 0

        def handler(path: str, lineno: int, message: str) -> None:
            nonlocal shard_invalid
            shard_invalid += 1
            errors.append(f"{path}:{lineno}: {message}")

        try:
            recs = _load_shard(directory, descriptor, manifest.multiset, verify_checksums, handler)
        except FormatError as exc:
            errors.append(str(exc))
            prev_last_uid = None
            prev_tail_run = 0
            continue
        invalid += shard_invalid
        records += len(recs)
        if recs:
            if manifest.multiset and prev_last_uid is not None and recs[0].uid == prev_last_uid:
                head_run = 1
                while head_run < len(recs) and recs[head_run].uid == prev_last_uid:
                    head_run += 1
                if prev_tail_run + head_run > 2:
                    errors.append(
                        f"{descriptor.path}: uid {recs[0].uid} appears more than twice "
                        "across the shard boundary"
                    )
            prev_last_uid = recs[-1].uid
            prev_tail_run = 1
            for rec in reversed(recs[:-1]):
                if rec.uid != prev_last_uid:
                    break
                prev_tail_run += 1
    return PoolScan(
        record_count=records,
        shard_count=len(manifest.shards),
        invalid_count=invalid,
        errors=tuple(errors),
    )


# ---------------------------------------------------------------------------
# pool writing


def write_pool(
    pool: Pool,
    directory: str | Path,
    *,
    shard_size: int | None = None,
) -> Manifest:
    """Write a pool with fixed-size uid-sorted shards; manifest written last.

    Input invariants are enforced while streaming: an invalid record, an
    out-of-order record or an illegal uid repeat aborts the write.
    """
    directory = Path(directory)
    if shard_size is None:
        shard_size = shard_size_default()
    if shard_size < 1:
        raise ValidationError(f"shard size must be positive, got {shard_size}")
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FormatError(f"cannot create pool directory {directory}: {exc}") from exc

    descriptors: list[ShardDescriptor] = []
    buffer: list[MetadataRecord] = []
    prev_key = None
    prev_uid = None
    run = 0

    def flush() -> None:
        nonlocal buffer
        if not buffer:
            return
        name = SHARD_TEMPLATE % len(descriptors)
        payload = "".join(record_to_line(rec) + "\n" for rec in buffer).encode("utf-8")
        path = directory / name
        try:
            path.write_bytes(payload)
        except OSError as exc:
            raise FormatError(f"cannot write shard {path}: {exc}") from exc
        descriptors.append(
            ShardDescriptor(
                path=name,
                record_count=len(buffer),
                first_uid=buffer[0].uid,
                last_uid=buffer[-1].uid,
                crc32=zlib.crc32(payload),
            )
        )
        log.info("wrote %s (%d records)", path, len(buffer))
        buffer = []

    for rec in pool.iter_records():
        violations = validate_record(rec)
        if violations:
            raise ValidationError(
                f"invalid record {rec.uid!r}: " + "; ".join(map(str, violations))
            )
        key = record_sort_key(rec)
        if prev_key is not None and key < prev_key:
            raise ValidationError(f"pool not sorted at uid {rec.uid!r}")
        if rec.uid == prev_uid:
            run += 1
            if not pool.multiset:
                raise ValidationError(f"duplicate uid {rec.uid!r} in single-copy pool")
            if run >= 2:
                raise ValidationError(f"uid {rec.uid!r} appears more than twice")
        else:
            prev_uid = rec.uid
            run = 0
        prev_key = key
        buffer.append(rec)
        if len(buffer) >= shard_size:
            flush()
    flush()

    # Drop shard files left over from a previous, larger write of the same dir.
    index = len(descriptors)
    while (directory / (SHARD_TEMPLATE % index)).exists():
        (directory / (SHARD_TEMPLATE % index)).unlink()
        index += 1

    manifest = Manifest(
        multiset=pool.multiset, provenance=pool.provenance, shards=tuple(descriptors)
    )
    (directory / MANIFEST_NAME).write_text(_manifest_to_json(manifest), encoding="utf-8")
    return manifest


# ---------------------------------------------------------------------------
# embedding sidecars


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    path = Path(path)
    rows = np.ascontiguousarray(matrix.rows, dtype="<f4")
    name = matrix.space_name.encode("utf-8")
    header = SIDECAR_MAGIC + struct.pack("<IQI", matrix.dimension, len(rows), len(name)) + name
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rows.tobytes())
    if matrix.index is not None:
        lines = [f"{uid} {row:020d}\n" for uid, row in sorted(matrix.index.items())]
        Path(str(path) + ".uids").write_text("".join(lines), encoding="ascii")


def read_embeddings(path: str | Path, space_name: str | None = None) -> EmbeddingMatrix:
    """Load a sidecar. When ``space_name`` is given the header name must match;
    pass None to accept whatever space the file declares."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"missing embedding sidecar: {path}")
    data = path.read_bytes()
    fixed = len(SIDECAR_MAGIC) + struct.calcsize("<IQI")
    if len(data) < fixed or data[: len(SIDECAR_MAGIC)] != SIDECAR_MAGIC:
        raise FormatError(f"{path}: not an EMB1 sidecar")
    dimension, row_count, name_len = struct.unpack_from("<IQI", data, len(SIDECAR_MAGIC))
    if dimension < 1:
        raise FormatError(f"{path}: non-positive dimension {dimension}")
    offset = fixed + name_len
    if len(data) < offset:
        raise FormatError(f"{path}: truncated header")
    declared = data[fixed:offset].decode("utf-8")
    if space_name is not None and declared != space_name:
        raise FormatError(f"{path}: sidecar holds space {declared!r}, expected {space_name!r}")
    expected = row_count * dimension * 4
    payload = data[offset:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: length mismatch: expected {expected} payload bytes, found {len(payload)}"
        )
    rows = np.frombuffer(payload, dtype="<f4").reshape(row_count, dimension)
    finite = np.isfinite(rows).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise FormatError(f"{path}: non-finite entry in row {bad}")
    index = _read_uid_index(Path(str(path) + ".uids"), row_count)
    return EmbeddingMatrix(space_name=declared, rows=rows, index=index)


def _read_uid_index(path: Path, row_count: int) -> dict[str, int] | None:
    if not path.is_file():
        return None
    index: dict[str, int] = {}
    prev_uid = None
    for lineno, line in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 2 or len(parts[0]) != 32 or len(parts[1]) != 20:
            raise FormatError(f"{path}:{lineno}: malformed uid-index line")
        uid, row_text = parts
        try:
            row = int(row_text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed row index")
        if prev_uid is not None and uid <= prev_uid:
            raise FormatError(f"{path}:{lineno}: uid index not sorted")
        if not 0 <= row < row_count:
            raise FormatError(f"{path}:{lineno}: row {row} out of bounds")
        index[uid] = row
        prev_uid = uid
    if len(set(index.values())) != len(index):
        raise FormatError(f"{path}: uid index is not injective")
    return index


def resolve_space_path(pool_dir: str | Path, space_name: str) -> Path:
    """Conventional sidecar location: <pool>/<space_name>.emb."""
    return Path(pool_dir) / f"{space_name}.emb"
