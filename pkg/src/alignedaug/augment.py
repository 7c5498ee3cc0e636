"""The augmentation engine.

Covers frequency/time masking, aligned splice and mask replacement, the five
augmentation modes, and the streaming orchestration that makes each
utterance's result a pure function of (inputs, base seed, epoch) regardless
of worker count or ordering.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import BinaryIO, Iterable, Iterator, Sequence

import numpy as np

from .alignment import AlignedUtterance, TokenSpan, validate
from .audiodict import AudioDictionary, SegmentEntry, sample
from .candidates import CandidateSet, Predictor, choose, lm_candidates, random_token, top1
from .errors import AlignedAugError, DimensionMismatch, SpanOutOfRange
from .features import CorpusManifest, FeatureMatrix, Utterance, load_utterance
from .schedule import (
    LIBRI100,
    MixtureSchedule,
    SentenceAssignment,
    assign_mode,
    n_replacements,
)


class AugmentMode(Enum):
    SPECAUGMENT = "specaugment"
    LM_ONLY = "lm-only"
    DICT_ONLY = "dict-only"
    ADA_LM = "ada-lm"
    ADA_RT = "ada-rt"


ACTION_SPLICED = "SPLICED"
ACTION_MASKED = "MASKED"
ACTION_UNCHANGED = "UNCHANGED"

# Audio-side action per replacement: SPLICED swapped the span for a dictionary
# segment, MASKED zeroed it, UNCHANGED left the rows alone (text-only edits
# and skipped positions).


@dataclass(frozen=True)
class MaskRect:
    axis: str  # "time" or "freq"
    start: int
    width: int


@dataclass(frozen=True)
class Replacement:
    position: int
    original: str
    replacement: str
    action: str
    segment_id: int | None = None


@dataclass(frozen=True)
class AugmentConfig:
    mode: AugmentMode = AugmentMode.ADA_RT
    freq_mask_param: int = 30
    n_freq_masks: int = 2
    time_mask_param: int = 40
    n_time_masks: int = 2
    mask_value: float = 0.0
    schedule: MixtureSchedule = LIBRI100
    lm_top_k: int = 5
    lm_temperature: float = 1.0
    lm_argmax: bool = False
    lm_retry: bool = False
    exclude_original: bool = True
    max_frames: int = 3000
    base_seed: int = 0


@dataclass(frozen=True)
class AugmentTrace:
    """Machine-readable record of every decision made for one utterance."""

    utt_id: str
    epoch: int
    mode_assigned: str
    replacements: tuple[Replacement, ...]
    n_frames_before: int
    n_frames_after: int
    spec_augment_masks: tuple[MaskRect, ...]
    fallback: str | None = None

    def to_dict(self) -> dict:
        return {
            "utt_id": self.utt_id,
            "epoch": self.epoch,
            "mode_assigned": self.mode_assigned,
            "replacements": [
                {
                    "position": r.position,
                    "original": r.original,
                    "replacement": r.replacement,
                    "action": r.action,
                    "segment_id": r.segment_id,
                }
                for r in self.replacements
            ],
            "n_frames_before": self.n_frames_before,
            "n_frames_after": self.n_frames_after,
            "spec_augment_masks": [
                {"axis": m.axis, "start": m.start, "width": m.width}
                for m in self.spec_augment_masks
            ],
            "fallback": self.fallback,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentTrace":
        return cls(
            utt_id=d["utt_id"],
            epoch=d["epoch"],
            mode_assigned=d["mode_assigned"],
            replacements=tuple(
                Replacement(
                    r["position"], r["original"], r["replacement"], r["action"], r.get("segment_id")
                )
                for r in d["replacements"]
            ),
            n_frames_before=d["n_frames_before"],
            n_frames_after=d["n_frames_after"],
            spec_augment_masks=tuple(
                MaskRect(m["axis"], m["start"], m["width"]) for m in d["spec_augment_masks"]
            ),
            fallback=d.get("fallback"),
        )

    @classmethod
    def from_json(cls, line: str) -> "AugmentTrace":
        return cls.from_dict(json.loads(line))


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a; the published hash every implementation must agree on."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def stable_hash(utt_id: str) -> int:
    return fnv1a64(utt_id.encode("utf-8"))


def utterance_seed(base_seed: int, epoch: int, utt_id: str) -> int:
    """Derive the per-utterance generator seed from (base_seed, epoch, id).

    The three values are packed little-endian as two signed and one unsigned
    64-bit integer and hashed again, so results do not depend on worker count,
    scheduling, or the process's hash randomization.
    """
    material = struct.pack("<qqQ", base_seed, epoch, stable_hash(utt_id))
    return fnv1a64(material)


# ---------------------------------------------------------------------------
# Masking and splicing primitives
# ---------------------------------------------------------------------------

def spec_augment(
    m: FeatureMatrix,
    freq_mask_param: int = 30,
    n_freq_masks: int = 2,
    time_mask_param: int = 40,
    n_time_masks: int = 2,
    mask_value: float = 0.0,
    rng: Random | None = None,
) -> tuple[FeatureMatrix, tuple[MaskRect, ...]]:
    """Random frequency and time masking.

    Each frequency mask has width drawn uniformly from {0..F} (clamped to the
    feature dimension) at an offset where it fits; time masks use {0..min(T,
    n_frames)}. Returns the masked copy plus the drawn rectangles so callers
    can audit exactly which cells were touched. Degenerate sizes produce
    zero-width masks rather than errors.
    """
    rng = rng if rng is not None else Random()
    data = m.data.copy()
    n_frames, n_dims = data.shape
    rects = []
    for _ in range(n_freq_masks):
        f = rng.randrange(min(freq_mask_param, n_dims) + 1)
        f0 = rng.randrange(n_dims - f + 1)
        data[:, f0 : f0 + f] = mask_value
        rects.append(MaskRect("freq", f0, f))
    for _ in range(n_time_masks):
        t = rng.randrange(min(time_mask_param, n_frames) + 1)
        t0 = rng.randrange(n_frames - t + 1)
        data[t0 : t0 + t, :] = mask_value
        rects.append(MaskRect("time", t0, t))
    return FeatureMatrix(data, m.frame_rate), tuple(rects)


def splice(
    u: Utterance,
    spans: Sequence[TokenSpan],
    position: int,
    segment: SegmentEntry,
) -> tuple[Utterance, tuple[TokenSpan, ...]]:
    """Replace the frame rows of ``spans[position]`` with a segment.

    The utterance grows or shrinks by the length difference; the replaced
    span is re-widthed to the segment length and every later span shifts by
    the same delta. Earlier spans are untouched. The transcript is not
    changed here; token substitution is the engine's job.
    """
    feats = u.features
    if segment.n_dims != feats.n_dims:
        raise DimensionMismatch(
            f"segment has {segment.n_dims} dims, utterance has {feats.n_dims}"
        )
    sp = spans[position]
    delta = segment.n_frames - sp.width
    data = np.concatenate(
        [feats.data[: sp.start_frame], segment.data, feats.data[sp.end_frame :]]
    )
    new_spans = list(spans)
    new_spans[position] = TokenSpan(sp.token, sp.start_frame, sp.start_frame + segment.n_frames)
    if delta:
        for i in range(position + 1, len(new_spans)):
            s = new_spans[i]
            new_spans[i] = TokenSpan(s.token, s.start_frame + delta, s.end_frame + delta)
    out = Utterance(u.utt_id, FeatureMatrix(data, feats.frame_rate), u.transcript)
    return out, tuple(new_spans)


def mask_span(m: FeatureMatrix, span: tuple[int, int], mask_value: float = 0.0) -> FeatureMatrix:
    """Set every cell of rows [start, end) to ``mask_value``; idempotent."""
    start, end = span
    if not 0 <= start < end <= m.n_frames:
        raise SpanOutOfRange("<matrix>", "<span>", f"[{start}, {end}) vs {m.n_frames} frames")
    data = m.data.copy()
    data[start:end, :] = mask_value
    return FeatureMatrix(data, m.frame_rate)


# ---------------------------------------------------------------------------
# Per-utterance engine
# ---------------------------------------------------------------------------

def _sample_positions(rng: Random, n: int, k: int) -> list[int]:
    """k distinct indices from range(n), uniform without replacement.

    Partial Fisher-Yates on an index list; fully specified so the draw
    sequence is reproducible everywhere.
    """
    idx = list(range(n))
    for i in range(k):
        j = rng.randrange(i, n)
        idx[i], idx[j] = idx[j], idx[i]
    return sorted(idx[:k])


def _replace_token(
    spans: list[TokenSpan], transcript: list[str], position: int, new_token: str
) -> None:
    sp = spans[position]
    spans[position] = TokenSpan(new_token, sp.start_frame, sp.end_frame)
    transcript[position] = new_token


def _apply_replacements(
    u: Utterance,
    spans: Sequence[TokenSpan],
    d: AudioDictionary | None,
    predictor: Predictor | None,
    cfg: AugmentConfig,
    mode: AugmentMode,
    token_fraction: float,
    rng: Random,
) -> tuple[Utterance, tuple[TokenSpan, ...], list[Replacement]]:
    """Token+segment replacement for one utterance under a concrete mode.

    Positions are processed in descending order so each span still carries
    its original coordinates when it is replaced (splices only move rows
    above the current position). Returns the reworked utterance, its spans,
    and the applied replacements.
    """
    if mode is AugmentMode.SPECAUGMENT or not spans:
        return u, tuple(spans), []
    if d is None and mode in (AugmentMode.ADA_RT, AugmentMode.DICT_ONLY, AugmentMode.ADA_LM):
        raise ValueError(f"mode {mode.value} requires an audio dictionary")
    n = len(spans)
    k = n_replacements(n, token_fraction)
    if k == 0:
        return u, tuple(spans), []
    positions = _sample_positions(rng, n, k)

    cands: dict[int, CandidateSet] = {}
    if mode in (AugmentMode.ADA_LM, AugmentMode.LM_ONLY):
        if predictor is None:
            raise ValueError(f"mode {mode.value} requires a predictor")
        for cs in lm_candidates(predictor, list(u.transcript), positions, cfg.lm_top_k):
            cands[cs.position] = cs

    work = u
    work_spans = list(spans)
    transcript = list(u.transcript)
    replacements: list[Replacement] = []

    for p in sorted(positions, reverse=True):
        sp = work_spans[p]
        orig = sp.token
        own_span = (u.utt_id, sp.start_frame) if cfg.exclude_original else None

        if mode is AugmentMode.ADA_RT:
            new_tok = random_token(d.keys_sorted, rng, exclude_original=orig)
            seg = sample(d, new_tok, rng, exclude=own_span if new_tok == orig else None)
            _replace_token(work_spans, transcript, p, new_tok)
            work = Utterance(work.utt_id, work.features, tuple(transcript))
            work, spans_t = splice(work, work_spans, p, seg)
            work_spans = list(spans_t)
            replacements.append(Replacement(p, orig, new_tok, ACTION_SPLICED, seg.segment_id))

        elif mode is AugmentMode.DICT_ONLY:
            seg = sample(d, orig, rng, exclude=own_span)
            if seg is None:
                replacements.append(Replacement(p, orig, orig, ACTION_UNCHANGED))
            else:
                work, spans_t = splice(work, work_spans, p, seg)
                work_spans = list(spans_t)
                replacements.append(Replacement(p, orig, orig, ACTION_SPLICED, seg.segment_id))

        elif mode is AugmentMode.LM_ONLY:
            cs = cands.get(p)
            if cs is None or not cs.candidates:
                replacements.append(Replacement(p, orig, orig, ACTION_UNCHANGED))
                continue
            new_tok = top1(cs) if cfg.lm_argmax else choose(cs, rng, cfg.lm_temperature)
            _replace_token(work_spans, transcript, p, new_tok)
            work = Utterance(work.utt_id, work.features, tuple(transcript))
            replacements.append(Replacement(p, orig, new_tok, ACTION_UNCHANGED))

        elif mode is AugmentMode.ADA_LM:
            cs = cands.get(p)
            if cs is None or not cs.candidates:
                replacements.append(Replacement(p, orig, orig, ACTION_UNCHANGED))
                continue
            new_tok = top1(cs) if cfg.lm_argmax else choose(cs, rng, cfg.lm_temperature)
            if new_tok not in d and new_tok != orig and cfg.lm_retry:
                for cand_tok, _ in cs.candidates:
                    if cand_tok in d:
                        new_tok = cand_tok
                        break
            if new_tok == orig:
                # Same-token prediction degenerates to a source-side-only
                # replacement: fresh audio, unchanged text.
                seg = sample(d, orig, rng, exclude=own_span)
                if seg is None:
                    replacements.append(Replacement(p, orig, orig, ACTION_UNCHANGED))
                else:
                    work, spans_t = splice(work, work_spans, p, seg)
                    work_spans = list(spans_t)
                    replacements.append(
                        Replacement(p, orig, orig, ACTION_SPLICED, seg.segment_id)
                    )
            elif new_tok in d:
                seg = sample(d, new_tok, rng)
                _replace_token(work_spans, transcript, p, new_tok)
                work = Utterance(work.utt_id, work.features, tuple(transcript))
                work, spans_t = splice(work, work_spans, p, seg)
                work_spans = list(spans_t)
                replacements.append(Replacement(p, orig, new_tok, ACTION_SPLICED, seg.segment_id))
            else:
                # No dictionary entry for the prediction: mask the original
                # audio but keep the new token on the text side.
                masked = mask_span(work.features, (sp.start_frame, sp.end_frame), cfg.mask_value)
                _replace_token(work_spans, transcript, p, new_tok)
                work = Utterance(work.utt_id, masked, tuple(transcript))
                replacements.append(Replacement(p, orig, new_tok, ACTION_MASKED))

        else:  # pragma: no cover
            raise ValueError(f"unhandled mode {mode}")

    replacements.sort(key=lambda r: r.position)
    return work, tuple(work_spans), replacements


def _augment_one(
    u: Utterance,
    a: AlignedUtterance | None,
    d: AudioDictionary | None,
    predictor: Predictor | None,
    cfg: AugmentConfig,
    epoch: int,
    mode: AugmentMode,
    token_fraction: float,
    rng: Random,
    fallback: str | None,
) -> tuple[Utterance, AugmentTrace]:
    spans: Sequence[TokenSpan] = ()
    if mode is not AugmentMode.SPECAUGMENT and a is not None:
        try:
            a = validate(a, u.features.n_frames)
        except AlignedAugError:
            a, mode, fallback = None, AugmentMode.SPECAUGMENT, "invalid_alignment"
        if a is not None and a.tokens != u.transcript:
            a, mode, fallback = None, AugmentMode.SPECAUGMENT, "alignment_mismatch"
        if a is not None:
            spans = a.spans

    out, _, replacements = _apply_replacements(
        u, spans, d, predictor, cfg, mode, token_fraction, rng
    )

    if out.features.n_frames > cfg.max_frames:
        # Splices pushed the utterance over the training length budget; fall
        # back to the untouched original so the memory contract holds.
        out, replacements, fallback = u, [], "over_length"

    masked, rects = spec_augment(
        out.features,
        cfg.freq_mask_param,
        cfg.n_freq_masks,
        cfg.time_mask_param,
        cfg.n_time_masks,
        cfg.mask_value,
        rng,
    )
    out = Utterance(out.utt_id, masked, out.transcript)
    trace = AugmentTrace(
        utt_id=u.utt_id,
        epoch=epoch,
        mode_assigned=mode.value,
        replacements=tuple(replacements),
        n_frames_before=u.features.n_frames,
        n_frames_after=out.features.n_frames,
        spec_augment_masks=rects,
        fallback=fallback,
    )
    return out, trace


def augment_utterance(
    u: Utterance,
    a: AlignedUtterance | None,
    d: AudioDictionary | None,
    predictor: Predictor | None,
    cfg: AugmentConfig,
    epoch: int = 0,
) -> tuple[Utterance, AugmentTrace]:
    """Augment one utterance with the mode fixed by ``cfg.mode``.

    The per-utterance generator is seeded from (base_seed, epoch, utt_id), so
    repeated calls with identical inputs reproduce identical outputs. Token
    selection uses the schedule's aligned-token fraction. Anything that
    prevents replacement is recorded as a trace fallback rather than raised;
    only predictor transport errors propagate.
    """
    rng = Random(utterance_seed(cfg.base_seed, epoch, u.utt_id))
    mode = cfg.mode
    fallback = None
    if a is None and mode is not AugmentMode.SPECAUGMENT:
        mode, fallback = AugmentMode.SPECAUGMENT, "no_alignment"
    return _augment_one(
        u, a, d, predictor, cfg, epoch, mode, cfg.schedule.f_aligned_tok, rng, fallback
    )


def _resolve_assignment(
    cfg: AugmentConfig, assignment: SentenceAssignment
) -> tuple[AugmentMode, float]:
    """Concrete mode + token fraction for a sentence-level assignment.

    Aligned slots run the configured strategy. Dictionary-only slots apply
    only when the main strategy is an aligned one; in single-sided runs
    (lm-only / dict-only) they pass through so those runs touch exactly the
    aligned fraction of sentences.
    """
    if assignment is SentenceAssignment.UNCHANGED:
        return AugmentMode.SPECAUGMENT, 0.0
    if assignment is SentenceAssignment.ALIGNED:
        return cfg.mode, cfg.schedule.f_aligned_tok
    if cfg.mode in (AugmentMode.ADA_LM, AugmentMode.ADA_RT):
        return AugmentMode.DICT_ONLY, cfg.schedule.f_dict_tok
    return AugmentMode.SPECAUGMENT, 0.0


def augment_pairs(
    pairs: Iterable[tuple[Utterance, AlignedUtterance | None]],
    d: AudioDictionary | None,
    predictor: Predictor | None,
    cfg: AugmentConfig,
    epoch: int = 0,
) -> Iterator[tuple[Utterance, AugmentTrace]]:
    """Drive the schedule over in-memory (utterance, alignment) pairs."""
    for u, a in pairs:
        rng = Random(utterance_seed(cfg.base_seed, epoch, u.utt_id))
        fallback = None
        if cfg.mode is AugmentMode.SPECAUGMENT:
            mode, fraction = AugmentMode.SPECAUGMENT, 0.0
        elif a is None:
            mode, fraction, fallback = AugmentMode.SPECAUGMENT, 0.0, "no_alignment"
        else:
            assignment = assign_mode(rng.random(), cfg.schedule)
            mode, fraction = _resolve_assignment(cfg, assignment)
        yield _augment_one(u, a, d, predictor, cfg, epoch, mode, fraction, rng, fallback)


def augment_stream(
    corpus: CorpusManifest,
    alignments: Sequence[AlignedUtterance],
    d: AudioDictionary | None,
    predictor: Predictor | None,
    cfg: AugmentConfig,
    epoch: int = 0,
) -> Iterator[tuple[Utterance, AugmentTrace]]:
    """Augment every manifest entry, in manifest order.

    Utterances without an alignment pass through as SpecAugment-only with a
    trace note. Output depends only on (inputs, base_seed, epoch).
    """
    align_by_id = {a.utt_id: a for a in alignments}

    def pairs():
        for entry in corpus.entries:
            yield load_utterance(entry), align_by_id.get(entry.utt_id)

    return augment_pairs(pairs(), d, predictor, cfg, epoch)


# ---------------------------------------------------------------------------
# ADAB record stream
# ---------------------------------------------------------------------------

def write_adab_record(fh: BinaryIO, u: Utterance) -> None:
    """One augmented record: utt_id (u16 length + UTF-8), transcript (u32
    length + UTF-8, space-separated), n_frames u32, n_dims u32, f32 payload,
    all little-endian."""
    utt_b = u.utt_id.encode("utf-8")
    tr_b = " ".join(u.transcript).encode("utf-8")
    fh.write(struct.pack("<H", len(utt_b)))
    fh.write(utt_b)
    fh.write(struct.pack("<I", len(tr_b)))
    fh.write(tr_b)
    fh.write(struct.pack("<II", u.features.n_frames, u.features.n_dims))
    fh.write(np.ascontiguousarray(u.features.data, dtype="<f4").tobytes())


def adab_record_bytes(u: Utterance) -> bytes:
    import io

    buf = io.BytesIO()
    write_adab_record(buf, u)
    return buf.getvalue()


def read_adab_records(fh: BinaryIO, frame_rate: int = 100) -> Iterator[Utterance]:
    """Inverse of :func:`write_adab_record`; stops cleanly at end of stream."""
    while True:
        head = fh.read(2)
        if not head:
            return
        (utt_len,) = struct.unpack("<H", head)
        utt_id = fh.read(utt_len).decode("utf-8")
        (tr_len,) = struct.unpack("<I", fh.read(4))
        transcript = tuple(fh.read(tr_len).decode("utf-8").split())
        n_frames, n_dims = struct.unpack("<II", fh.read(8))
        payload = fh.read(n_frames * n_dims * 4)
        data = np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_dims)
        yield Utterance(utt_id, FeatureMatrix(data.copy(), frame_rate), transcript)
