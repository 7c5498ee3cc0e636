"""The audio dictionary: a token-keyed pool of aligned feature segments.

Built once from a corpus plus its forced alignments, then queried during
augmentation to splice in alternative pronunciations of a token. Persistence
uses the ADAD format described in :func:`save`.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

import numpy as np

from .alignment import AlignedUtterance, validate
from .errors import (
    BadMagic,
    DimensionMismatch,
    TruncatedFile,
    UnknownUtterance,
    VersionMismatch,
)
from .features import CorpusManifest, load_utterance

ADAD_MAGIC = b"ADAD"
ADAD_VERSION = 1


@dataclass(frozen=True, eq=False)
class SegmentEntry:
    """One pooled audio segment: an owned float32 copy of the source slice."""

    segment_id: int
    source_utt_id: str
    start_frame: int
    end_frame: int
    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] != self.end_frame - self.start_frame:
            raise ValueError("segment data shape disagrees with its frame span")
        if arr.shape[0] < 1:
            raise ValueError("segments must contain at least one frame")
        object.__setattr__(self, "data", arr)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_dims(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DictStats:
    n_keys: int
    n_segments: int
    total_frames: int
    pool_histogram: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class BuildOptions:
    """Dictionary build knobs.

    ``max_pool`` caps each token's pool with reservoir sampling (memory valve
    for very frequent function words); ``min_frames`` drops spans shorter
    than the given width. Defaults keep everything.
    """

    max_pool: int | None = None
    min_frames: int = 1
    seed: int = 0


class AudioDictionary:
    """token -> ordered pool of SegmentEntry; immutable once constructed."""

    def __init__(self, n_dims: int, entries: dict[str, list[SegmentEntry]]):
        seen_ids = set()
        for token, pool in entries.items():
            if not pool:
                raise ValueError(f"empty pool for token {token!r}")
            for seg in pool:
                if seg.n_dims != n_dims:
                    raise DimensionMismatch(
                        f"segment {seg.segment_id} has {seg.n_dims} dims, dictionary has {n_dims}"
                    )
                if seg.segment_id in seen_ids:
                    raise ValueError(f"duplicate segment_id {seg.segment_id}")
                seen_ids.add(seg.segment_id)
        self._n_dims = n_dims
        self._entries = {tok: tuple(pool) for tok, pool in entries.items()}
        self._keys_sorted: tuple[str, ...] | None = None

    @property
    def n_dims(self) -> int:
        return self._n_dims

    @property
    def n_keys(self) -> int:
        return len(self._entries)

    @property
    def keys_sorted(self) -> tuple[str, ...]:
        if self._keys_sorted is None:
            self._keys_sorted = tuple(sorted(self._entries))
        return self._keys_sorted

    def __contains__(self, token: str) -> bool:
        return token in self._entries

    def tokens(self):
        return self._entries.keys()

    def pool(self, token: str) -> tuple[SegmentEntry, ...]:
        return self._entries[token]


def build(
    corpus: CorpusManifest,
    alignments: list[AlignedUtterance],
    opts: BuildOptions = BuildOptions(),
) -> AudioDictionary:
    """Build the dictionary by slicing every aligned token span out of the
    corpus features. Iterates in corpus order so segment ids are stable."""
    by_entry = {e.utt_id: e for e in corpus.entries}
    for a in alignments:
        if a.utt_id not in by_entry:
            raise UnknownUtterance(a.utt_id)
    align_by_id = {a.utt_id: a for a in alignments}

    rng = Random(opts.seed)
    pools: dict[str, list[SegmentEntry]] = {}
    pool_seen: dict[str, int] = {}
    n_dims: int | None = None
    next_id = 0

    for entry in corpus.entries:
        a = align_by_id.get(entry.utt_id)
        if a is None:
            continue
        utt = load_utterance(entry)
        if n_dims is None:
            n_dims = utt.features.n_dims
        elif utt.features.n_dims != n_dims:
            raise DimensionMismatch(
                f"{entry.utt_id}: {utt.features.n_dims} dims, expected {n_dims}"
            )
        a = validate(a, utt.features.n_frames)
        for sp in a.spans:
            if sp.width < opts.min_frames:
                continue
            seg = SegmentEntry(
                segment_id=next_id,
                source_utt_id=entry.utt_id,
                start_frame=sp.start_frame,
                end_frame=sp.end_frame,
                data=utt.features.data[sp.start_frame : sp.end_frame].copy(),
            )
            next_id += 1
            pool = pools.setdefault(sp.token, [])
            if opts.max_pool is None:
                pool.append(seg)
            else:
                seen = pool_seen.get(sp.token, 0)
                if len(pool) < opts.max_pool:
                    pool.append(seg)
                else:
                    j = rng.randrange(seen + 1)
                    if j < opts.max_pool:
                        pool[j] = seg
                pool_seen[sp.token] = seen + 1

    return AudioDictionary(n_dims if n_dims is not None else 0, pools)


def sample(
    d: AudioDictionary,
    token: str,
    rng: Random,
    exclude: tuple[str, int] | None = None,
) -> SegmentEntry | None:
    """Uniform draw from ``token``'s pool, skipping the segment identified by
    ``exclude = (source_utt_id, start_frame)`` when alternatives exist.

    Returns None when the token has no pool (callers treat that as the cue
    for mask fallback). If exclusion would empty the pool, the excluded
    segment itself is returned.
    """
    if token not in d:
        return None
    pool = d.pool(token)
    n = len(pool)
    if exclude is None or n == 1:
        if exclude is not None and n == 1:
            return pool[0]
        return pool[rng.randrange(n)]

    def excluded(seg: SegmentEntry) -> bool:
        return seg.source_utt_id == exclude[0] and seg.start_frame == exclude[1]

    # A well-formed build holds at most one matching segment, so rejection
    # sampling terminates almost immediately; the scan fallback covers
    # hand-built dictionaries where every entry matches.
    for _ in range(64):
        seg = pool[rng.randrange(n)]
        if not excluded(seg):
            return seg
    survivors = [seg for seg in pool if not excluded(seg)]
    if not survivors:
        return pool[rng.randrange(n)]
    return survivors[rng.randrange(len(survivors))]


def stats(d: AudioDictionary) -> DictStats:
    histogram: dict[int, int] = {}
    n_segments = 0
    total_frames = 0
    for token in d.tokens():
        pool = d.pool(token)
        histogram[len(pool)] = histogram.get(len(pool), 0) + 1
        n_segments += len(pool)
        total_frames += sum(seg.n_frames for seg in pool)
    return DictStats(d.n_keys, n_segments, total_frames, histogram)


# ---------------------------------------------------------------------------
# Persistence (ADAD format)
# ---------------------------------------------------------------------------
#
# magic "ADAD", version u16 LE, n_dims u32 LE, n_keys u32 LE;
# keys section, one record per key in dictionary order:
#   token length u16 LE, token UTF-8, pool size u32 LE;
# segments section, pools in key order, segments in pool order:
#   segment_id u64 LE, utt-id length u16 LE, utt-id UTF-8,
#   start_frame u32 LE, end_frame u32 LE, (end-start)*n_dims f32 LE payload.

_HEAD = struct.Struct("<4sHII")
_SEG_HEAD = struct.Struct("<QH")
_SEG_SPAN = struct.Struct("<II")


def save(d: AudioDictionary, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(ADAD_MAGIC, ADAD_VERSION, d.n_dims, d.n_keys))
        for token in d.tokens():
            tok_b = token.encode("utf-8")
            fh.write(struct.pack("<H", len(tok_b)))
            fh.write(tok_b)
            fh.write(struct.pack("<I", len(d.pool(token))))
        for token in d.tokens():
            for seg in d.pool(token):
                utt_b = seg.source_utt_id.encode("utf-8")
                fh.write(_SEG_HEAD.pack(seg.segment_id, len(utt_b)))
                fh.write(utt_b)
                fh.write(_SEG_SPAN.pack(seg.start_frame, seg.end_frame))
                fh.write(np.ascontiguousarray(seg.data, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, blob: bytes, path):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedFile(f"{self.path}: needed {n} bytes at offset {self.pos}")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def load(path: str | Path) -> AudioDictionary:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != ADAD_MAGIC:
        raise BadMagic(f"{path}: not an ADAD file")
    r = _Reader(blob, path)
    _magic, version, n_dims, n_keys = r.unpack(_HEAD)
    if version != ADAD_VERSION:
        raise VersionMismatch(f"{path}: version {version}, supported {ADAD_VERSION}")
    keys: list[tuple[str, int]] = []
    for _ in range(n_keys):
        (tok_len,) = struct.unpack("<H", r.take(2))
        token = r.take(tok_len).decode("utf-8")
        (pool_size,) = struct.unpack("<I", r.take(4))
        keys.append((token, pool_size))
    entries: dict[str, list[SegmentEntry]] = {}
    for token, pool_size in keys:
        pool = []
        for _ in range(pool_size):
            segment_id, utt_len = r.unpack(_SEG_HEAD)
            utt_id = r.take(utt_len).decode("utf-8")
            start, end = r.unpack(_SEG_SPAN)
            payload = r.take((end - start) * n_dims * 4)
            data = np.frombuffer(payload, dtype="<f4").reshape(end - start, n_dims)
            pool.append(SegmentEntry(segment_id, utt_id, start, end, data.copy()))
        entries[token] = pool
    if r.pos != len(blob):
        raise TruncatedFile(f"{path}: {len(blob) - r.pos} trailing bytes")
    return AudioDictionary(n_dims, entries)
