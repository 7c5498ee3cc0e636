"""SpecAugment geometry, splicing, masking, per-mode behavior, and the
determinism contract of the streaming engine."""

import io
from random import Random

import numpy as np
import pytest

from alignedaug import (
    AlignedUtterance,
    AugmentConfig,
    AugmentMode,
    AugmentTrace,
    FeatureMatrix,
    TokenSpan,
    Utterance,
    augment_pairs,
    augment_utterance,
    mask_span,
    spec_augment,
    splice,
)
from alignedaug import audiodict
from alignedaug.augment import (
    _apply_replacements,
    _sample_positions,
    adab_record_bytes,
    fnv1a64,
    read_adab_records,
    stable_hash,
    utterance_seed,
)
from alignedaug.candidates import MockPredictor
from alignedaug.errors import DimensionMismatch, SpanOutOfRange
from alignedaug.features import load_utterance
from alignedaug.schedule import MixtureSchedule

from conftest import make_matrix, synth_corpus

NO_SPECAUG = dict(freq_mask_param=0, n_freq_masks=0, time_mask_param=0, n_time_masks=0)


def check_specaugment_locality(seed: int, F=30, nF=2, T=40, nT=2) -> None:
    """Independent geometry oracle: reconstruct the touched region from the
    returned rectangles and compare cell by cell."""
    nprng = np.random.default_rng(seed)
    n_frames = int(nprng.integers(1, 120))
    n_dims = int(nprng.integers(1, 96))
    m = FeatureMatrix(nprng.normal(size=(n_frames, n_dims)).astype(np.float32) + 5.0)
    out, rects = spec_augment(m, F, nF, T, nT, mask_value=0.0, rng=Random(seed))

    covered = np.zeros((n_frames, n_dims), dtype=bool)
    for r in rects:
        if r.axis == "freq":
            assert r.width <= F and 0 <= r.start <= n_dims - r.width
            covered[:, r.start : r.start + r.width] = True
            assert np.all(out.data[:, r.start : r.start + r.width] == 0.0)
        else:
            assert r.axis == "time"
            assert r.width <= T and 0 <= r.start <= n_frames - r.width
            covered[r.start : r.start + r.width, :] = True
            assert np.all(out.data[r.start : r.start + r.width, :] == 0.0)
    changed = out.data != m.data
    assert not np.any(changed & ~covered)
    assert len(rects) == nF + nT


def check_splice_oracle(seed: int) -> None:
    """Independent concatenation oracle for one random splice case."""
    nprng = np.random.default_rng(seed)
    n_dims = int(nprng.integers(1, 24))
    n_spans = int(nprng.integers(1, 8))
    widths = nprng.integers(1, 12, size=n_spans)
    bounds = np.concatenate(([0], np.cumsum(widths)))
    n_frames = int(bounds[-1]) + int(nprng.integers(0, 5))
    feats = FeatureMatrix(nprng.normal(size=(n_frames, n_dims)).astype(np.float32))
    spans = tuple(
        TokenSpan(f"w{i}", int(bounds[i]), int(bounds[i + 1])) for i in range(n_spans)
    )
    u = Utterance("u", feats, tuple(s.token for s in spans))
    position = int(nprng.integers(0, n_spans))
    seg_len = int(nprng.integers(1, 15))
    seg = audiodict.SegmentEntry(
        0, "src", 0, seg_len, nprng.normal(size=(seg_len, n_dims)).astype(np.float32)
    )

    out, new_spans = splice(u, spans, position, seg)

    sp = spans[position]
    expected = np.concatenate(
        [feats.data[: sp.start_frame], seg.data, feats.data[sp.end_frame :]]
    )
    assert out.features.data.tobytes() == expected.tobytes()
    delta = seg_len - sp.width
    assert out.features.n_frames == n_frames + delta
    for i, (old, new) in enumerate(zip(spans, new_spans)):
        if i < position:
            assert new == old
        elif i == position:
            assert (new.start_frame, new.end_frame) == (old.start_frame, old.start_frame + seg_len)
        else:
            assert (new.start_frame, new.end_frame) == (
                old.start_frame + delta,
                old.end_frame + delta,
            )


class TestSpecAugment:
    def test_zero_params_identity(self):
        m = make_matrix(50, 80, seed=1)
        out, rects = spec_augment(m, 0, 2, 0, 2, 0.0, Random(0))
        assert out.data.tobytes() == m.data.tobytes()
        assert all(r.width == 0 for r in rects)

    def test_forced_full_row_mask(self):
        # On a 1-frame matrix a time mask of width 1 covers the whole row;
        # hunt for a seed that draws width 1.
        m = FeatureMatrix(np.ones((1, 80), dtype=np.float32))
        for seed in range(100):
            out, rects = spec_augment(m, 0, 0, 1, 1, 0.0, Random(seed))
            (rect,) = rects
            if rect.width == 1:
                assert np.all(out.data == 0.0)
                return
        pytest.fail("no seed produced a width-1 mask in 100 tries")

    def test_locality_oracle_small_batch(self):
        for seed in range(100):
            check_specaugment_locality(seed)

    def test_empty_matrix_no_crash(self):
        m = FeatureMatrix(np.zeros((0, 80), dtype=np.float32))
        out, rects = spec_augment(m, 30, 2, 40, 2, 0.0, Random(5))
        assert out.n_frames == 0
        assert all(r.width == 0 for r in rects if r.axis == "time")

    def test_width_never_exceeds_dimension(self):
        m = make_matrix(3, 4, seed=2)
        for seed in range(50):
            _, rects = spec_augment(m, 100, 2, 100, 2, 0.0, Random(seed))
            for r in rects:
                limit = 4 if r.axis == "freq" else 3
                assert r.width <= limit

    def test_mask_value_respected(self):
        m = FeatureMatrix(np.ones((20, 20), dtype=np.float32))
        out, rects = spec_augment(m, 10, 1, 10, 1, -7.5, Random(3))
        for r in rects:
            if r.width == 0:
                continue
            if r.axis == "freq":
                assert np.all(out.data[:, r.start : r.start + r.width] == -7.5)
            else:
                assert np.all(out.data[r.start : r.start + r.width, :] == -7.5)


class TestSplice:
    def _utt(self, n_frames=100, n_dims=8):
        feats = make_matrix(n_frames, n_dims, seed=4)
        spans = (
            TokenSpan("a", 0, 40),
            TokenSpan("b", 40, 60),
            TokenSpan("c", 70, 80),
        )
        return Utterance("u", feats, ("a", "b", "c")), spans

    def _seg(self, n, n_dims=8, seed=9):
        return audiodict.SegmentEntry(
            7, "src", 0, n, np.random.default_rng(seed).normal(size=(n, n_dims)).astype(np.float32)
        )

    def test_growth_and_shift(self):
        u, spans = self._utt()
        out, new_spans = splice(u, spans, 1, self._seg(30))
        assert out.features.n_frames == 110
        assert (new_spans[2].start_frame, new_spans[2].end_frame) == (80, 90)

    def test_equal_length_no_shift(self):
        u, spans = self._utt()
        out, new_spans = splice(u, spans, 1, self._seg(20))
        assert out.features.n_frames == 100
        assert new_spans[2] == spans[2]

    def test_concatenation_oracle(self):
        u, spans = self._utt()
        seg = self._seg(33)
        out, _ = splice(u, spans, 1, seg)
        expected = np.concatenate([u.features.data[:40], seg.data, u.features.data[60:]])
        assert out.features.data.tobytes() == expected.tobytes()

    def test_randomized_oracle_batch(self):
        for seed in range(200):
            check_splice_oracle(seed)

    def test_dimension_mismatch(self):
        u, spans = self._utt(n_dims=8)
        with pytest.raises(DimensionMismatch):
            splice(u, spans, 0, self._seg(10, n_dims=16))


class TestMaskSpan:
    def test_full_matrix(self):
        m = FeatureMatrix(np.ones((5, 4), dtype=np.float32))
        out = mask_span(m, (0, 5), 0.0)
        assert np.all(out.data == 0.0)

    def test_partial(self):
        m = FeatureMatrix(np.ones((2, 4), dtype=np.float32))
        out = mask_span(m, (0, 1), 0.0)
        assert np.all(out.data[0] == 0.0)
        assert np.all(out.data[1] == 1.0)

    def test_idempotent(self):
        m = make_matrix(10, 4, seed=6)
        once = mask_span(m, (2, 7), 0.0)
        twice = mask_span(once, (2, 7), 0.0)
        assert once.data.tobytes() == twice.data.tobytes()

    def test_out_of_range(self):
        m = make_matrix(4, 4)
        with pytest.raises(SpanOutOfRange):
            mask_span(m, (2, 6), 0.0)


def _cfg(mode, **kw):
    base = dict(NO_SPECAUG, mode=mode, base_seed=kw.pop("base_seed", 0))
    base.update(kw)
    return AugmentConfig(**base)


class TestAugmentUtterance:
    def test_specaugment_only_keeps_transcript(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        cfg = AugmentConfig(mode=AugmentMode.SPECAUGMENT, base_seed=1)
        out, trace = augment_utterance(u, tiny_corpus["alignments"][0], tiny_dict, None, cfg)
        assert out.transcript == u.transcript
        assert trace.mode_assigned == "specaugment"
        assert trace.replacements == ()

    def test_lm_only_touches_no_feature_rows(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        predictor = MockPredictor({"the": [("a", -0.1)], "cat": [("dog", -0.1)]})
        cfg = _cfg(AugmentMode.LM_ONLY)
        out, trace = augment_utterance(u, tiny_corpus["alignments"][0], tiny_dict, predictor, cfg)
        assert out.features.data.tobytes() == u.features.data.tobytes()
        assert out.transcript != u.transcript
        assert all(r.action == "UNCHANGED" for r in trace.replacements)
        assert any(r.replacement != r.original for r in trace.replacements)

    def test_dict_only_keeps_transcript_and_splices(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        cfg = _cfg(AugmentMode.DICT_ONLY)
        out, trace = augment_utterance(u, tiny_corpus["alignments"][0], tiny_dict, None, cfg)
        assert out.transcript == u.transcript
        assert len(trace.replacements) == 1
        rep = trace.replacements[0]
        assert rep.original == rep.replacement

    def test_ada_rt_replaces_token_and_audio(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=20, seed=5)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        u = load_utterance(fix["manifest"].entries[0])
        a = fix["alignments"][0]
        cfg = _cfg(AugmentMode.ADA_RT, base_seed=3)
        out, trace = augment_utterance(u, a, d, None, cfg)
        assert all(r.action == "SPLICED" for r in trace.replacements)
        for r in trace.replacements:
            assert out.transcript[r.position] == r.replacement
            assert r.replacement in d
        # Non-replaced positions keep their tokens.
        for i, tok in enumerate(u.transcript):
            if i not in {r.position for r in trace.replacements}:
                assert out.transcript[i] == tok

    def test_ada_rt_never_picks_original_when_alternatives_exist(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=20, seed=6)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        u = load_utterance(fix["manifest"].entries[0])
        a = fix["alignments"][0]
        for seed in range(30):
            _, trace = augment_utterance(u, a, d, None, _cfg(AugmentMode.ADA_RT, base_seed=seed))
            for r in trace.replacements:
                assert r.replacement != r.original

    def test_ada_lm_mask_fallback(self, tiny_corpus, tiny_dict):
        # Every prediction is out-of-dictionary: the span is masked and the
        # transcript still carries the new token.
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        a = tiny_corpus["alignments"][0]
        predictor = MockPredictor({"the": [("zzz", -0.1)], "cat": [("zzz", -0.1)]})
        cfg = _cfg(AugmentMode.ADA_LM)
        out, trace = augment_utterance(u, a, tiny_dict, predictor, cfg)
        assert len(trace.replacements) == 1
        rep = trace.replacements[0]
        assert rep.action == "MASKED"
        assert rep.replacement == "zzz"
        assert out.transcript[rep.position] == "zzz"
        span = a.spans[rep.position]
        assert np.all(out.features.data[span.start_frame : span.end_frame] == 0.0)
        #

    def test_ada_lm_same_token_is_source_side_only(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        a = tiny_corpus["alignments"][0]
        predictor = MockPredictor({"the": [("the", -0.1)], "cat": [("cat", -0.1)]})
        cfg = _cfg(AugmentMode.ADA_LM)
        out, trace = augment_utterance(u, a, tiny_dict, predictor, cfg)
        rep = trace.replacements[0]
        assert rep.original == rep.replacement
        assert rep.action == "SPLICED"
        assert out.transcript == u.transcript

    def test_ada_lm_retry_prefers_in_dictionary_candidate(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        a = tiny_corpus["alignments"][0]
        predictor = MockPredictor(
            {"the": [("zzz", -0.1), ("dog", -0.2)], "cat": [("zzz", -0.1), ("dog", -0.2)]}
        )
        out, trace = augment_utterance(
            u, a, tiny_dict, predictor, _cfg(AugmentMode.ADA_LM, lm_retry=True)
        )
        rep = trace.replacements[0]
        assert rep.action == "SPLICED"
        assert rep.replacement == "dog"

    def test_ada_lm_empty_candidates_unchanged(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        a = tiny_corpus["alignments"][0]
        out, trace = augment_utterance(
            u, a, tiny_dict, MockPredictor({}), _cfg(AugmentMode.ADA_LM)
        )
        assert all(r.action == "UNCHANGED" for r in trace.replacements)
        assert out.transcript == u.transcript

    def test_over_length_fallback(self, tiny_corpus, tiny_dict):
        # u2's 'the' spans 20 frames; the only alternative spans 30, so that
        # splice pushes the utterance to 110 frames, over the 100-frame cap.
        u = load_utterance(tiny_corpus["manifest"].entries[1])
        a = tiny_corpus["alignments"][1]
        for seed in range(50):
            out, trace = augment_utterance(
                u, a, tiny_dict, None, _cfg(AugmentMode.DICT_ONLY, max_frames=100, base_seed=seed)
            )
            if trace.fallback == "over_length":
                assert out.features.n_frames == u.features.n_frames
                assert trace.replacements == ()
                assert out.transcript == u.transcript
                return
        pytest.fail("no seed produced an over-length splice")

    def test_missing_alignment_falls_back(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        out, trace = augment_utterance(u, None, tiny_dict, None, _cfg(AugmentMode.ADA_RT))
        assert trace.fallback == "no_alignment"
        assert trace.mode_assigned == "specaugment"
        assert out.transcript == u.transcript

    def test_mismatched_alignment_falls_back(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        wrong = AlignedUtterance("u1", (TokenSpan("other", 0, 30), TokenSpan("words", 30, 60)))
        _, trace = augment_utterance(u, wrong, tiny_dict, None, _cfg(AugmentMode.ADA_RT))
        assert trace.fallback == "alignment_mismatch"

    def test_fig1_replacements(self, fig1_setup):
        # The worked example: 'apostle' -> 'president', 'quilter' -> 'lay',
        # both spliced from the dictionary. Seed chosen (deterministic search)
        # so positions 1 and 4 are the ones selected.
        u = load_utterance(fig1_setup["manifest"].entries[0])
        a = fig1_setup["alignments"][0]
        predictor = MockPredictor.from_tsv(fig1_setup["mock_path"])
        seed = next(
            s
            for s in range(10_000)
            if _sample_positions(Random(utterance_seed(s, 0, "f1")), 9, 2) == [1, 4]
        )
        cfg = _cfg(AugmentMode.ADA_LM, base_seed=seed)
        out, trace = augment_utterance(u, a, fig1_setup["dict"], predictor, cfg)
        by_pos = {r.position: r for r in trace.replacements}
        assert by_pos[4].original == "apostle" and by_pos[4].replacement == "president"
        assert by_pos[1].original == "quilter" and by_pos[1].replacement == "lay"
        assert all(r.action == "SPLICED" for r in trace.replacements)
        assert out.transcript == tuple("mister lay is the president of the middle classes".split())


class TestSpanConsistency:
    @pytest.mark.parametrize("mode", [AugmentMode.ADA_RT, AugmentMode.DICT_ONLY, AugmentMode.ADA_LM])
    def test_spans_track_transcript(self, tmp_path, mode):
        fix = synth_corpus(tmp_path / "c", n_utts=10, seed=12)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        predictor = MockPredictor(
            {w: [("alpha", -0.1), ("zzz", -0.5)] for w in ("bravo", "charlie", "delta", "echo")}
        )
        for entry, a in zip(fix["manifest"].entries, fix["alignments"]):
            u = load_utterance(entry)
            rng = Random(utterance_seed(17, 0, u.utt_id))
            cfg = _cfg(mode)
            out, spans, _ = _apply_replacements(u, a.spans, d, predictor, cfg, mode, 0.3, rng)
            assert tuple(sp.token for sp in spans) == out.transcript
            for prev, cur in zip(spans, spans[1:]):
                assert prev.end_frame <= cur.start_frame
            assert all(sp.width >= 1 for sp in spans)
            assert spans[-1].end_frame <= out.features.n_frames


class TestStreamDeterminism:
    def _run(self, fix, d, cfg, epoch=0, order=None):
        pairs = [
            (load_utterance(e), a)
            for e, a in zip(fix["manifest"].entries, fix["alignments"])
        ]
        if order:
            pairs = [pairs[i] for i in order]
        return {
            u.utt_id: (adab_record_bytes(u), t.to_json())
            for u, t in augment_pairs(pairs, d, None, cfg, epoch)
        }

    def test_same_seed_identical(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=25, seed=20)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        cfg = AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=7)
        assert self._run(fix, d, cfg) == self._run(fix, d, cfg)

    def test_order_independent_per_utterance(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=25, seed=21)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        cfg = AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=7)
        fwd = self._run(fix, d, cfg)
        rev = self._run(fix, d, cfg, order=list(reversed(range(25))))
        assert fwd == rev

    def test_epoch_changes_output(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=100, seed=22)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        cfg = AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=7)
        e0 = self._run(fix, d, cfg, epoch=0)
        e1 = self._run(fix, d, cfg, epoch=1)
        assert any(e0[k] != e1[k] for k in e0)

    def test_uncovered_utterance_passes_through(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=3, seed=23)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        pairs = [(load_utterance(fix["manifest"].entries[0]), None)]
        cfg = AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=7)
        ((u, trace),) = list(augment_pairs(pairs, d, None, cfg))
        assert trace.fallback == "no_alignment"
        assert trace.mode_assigned == "specaugment"

    def test_single_sided_mode_skips_dict_slot(self, tmp_path):
        # With p_aligned = 0 and p_dict = 1 every sentence lands in the dict
        # slot; lm-only runs must leave those sentences untouched.
        fix = synth_corpus(tmp_path / "c", n_utts=10, seed=24)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        sched = MixtureSchedule(0.0, 0.2, 1.0, 0.2)
        predictor = MockPredictor({})
        cfg = AugmentConfig(
            mode=AugmentMode.LM_ONLY, schedule=sched, base_seed=1, **NO_SPECAUG
        )
        pairs = [
            (load_utterance(e), a) for e, a in zip(fix["manifest"].entries, fix["alignments"])
        ]
        for _, trace in augment_pairs(pairs, d, predictor, cfg):
            assert trace.mode_assigned == "specaugment"
            assert trace.replacements == ()

    def test_aligned_slot_uses_configured_mode_dict_slot_uses_dict(self, tmp_path):
        fix = synth_corpus(tmp_path / "c", n_utts=200, seed=25)
        d = audiodict.build(fix["manifest"], fix["alignments"])
        cfg = AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=2, **NO_SPECAUG)
        pairs = [
            (load_utterance(e), a) for e, a in zip(fix["manifest"].entries, fix["alignments"])
        ]
        modes = {t.mode_assigned for _, t in augment_pairs(pairs, d, None, cfg)}
        assert modes == {"ada-rt", "dict-only", "specaugment"}


class TestSeeding:
    def test_fnv1a64_reference_vectors(self):
        # Published reference values for 64-bit FNV-1a.
        assert fnv1a64(b"") == 0xCBF29CE484222325
        assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
        assert fnv1a64(b"foobar") == 0x85944171F73967E8

    def test_stable_hash_is_fnv_of_utf8(self):
        assert stable_hash("abc") == fnv1a64(b"abc")
        assert stable_hash("hé") == fnv1a64("hé".encode("utf-8"))

    def test_utterance_seed_sensitivity(self):
        s = utterance_seed(0, 0, "utt1")
        assert utterance_seed(1, 0, "utt1") != s
        assert utterance_seed(0, 1, "utt1") != s
        assert utterance_seed(0, 0, "utt2") != s

    def test_sample_positions_uniform_without_replacement(self):
        rng = Random(0)
        for _ in range(200):
            pos = _sample_positions(rng, 10, 4)
            assert len(set(pos)) == 4
            assert pos == sorted(pos)
            assert all(0 <= p < 10 for p in pos)


class TestAdabRecords:
    def test_round_trip(self, tiny_corpus):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        blob = adab_record_bytes(u)
        (back,) = list(read_adab_records(io.BytesIO(blob)))
        assert back.utt_id == u.utt_id
        assert back.transcript == u.transcript
        assert back.features.data.tobytes() == u.features.data.tobytes()

    def test_stream_of_records(self, tiny_corpus):
        us = [load_utterance(e) for e in tiny_corpus["manifest"].entries]
        blob = b"".join(adab_record_bytes(u) for u in us)
        back = list(read_adab_records(io.BytesIO(blob)))
        assert [b.utt_id for b in back] == [u.utt_id for u in us]


class TestTraceSerialization:
    def test_json_round_trip(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        out, trace = augment_utterance(
            u, tiny_corpus["alignments"][0], tiny_dict, None,
            AugmentConfig(mode=AugmentMode.ADA_RT, base_seed=5),
        )
        assert AugmentTrace.from_json(trace.to_json()) == trace
        assert trace.n_frames_before == u.features.n_frames
        assert trace.n_frames_after == out.features.n_frames
        assert len(trace.spec_augment_masks) == 4

    def test_frame_delta_matches_splices(self, tiny_corpus, tiny_dict):
        u = load_utterance(tiny_corpus["manifest"].entries[0])
        a = tiny_corpus["alignments"][0]
        _, trace = augment_utterance(
            u, a, tiny_dict, None, _cfg(AugmentMode.ADA_RT, base_seed=5)
        )
        delta = 0
        for r in trace.replacements:
            if r.action == "SPLICED":
                seg = next(
                    s for t in tiny_dict.tokens() for s in tiny_dict.pool(t)
                    if s.segment_id == r.segment_id
                )
                delta += seg.n_frames - a.spans[r.position].width
        assert trace.n_frames_after == trace.n_frames_before + delta
