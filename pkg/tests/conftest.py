"""Shared fixtures: a tiny hand-countable corpus and synthetic corpus builders."""

from __future__ import annotations

from pathlib import Path
from random import Random

import numpy as np
import pytest

from alignedaug import (
    AudioDictionary,
    CorpusManifest,
    FeatureMatrix,
    ManifestEntry,
    parse_ctm,
    write_features,
)
from alignedaug import audiodict
from alignedaug.features import save_manifest

TINY_CTM = """\
u1 1 0.00 0.30 THE
u1 1 0.30 0.42 CAT
u2 1 0.05 0.20 THE
u2 1 0.25 0.50 DOG
"""


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # Expose per-phase reports so the acceptance module can print one
    # PASS/FAIL line per criterion.
    outcome = yield
    rep = outcome.get_result()
    setattr(item, "rep_" + rep.when, rep)


def make_matrix(n_frames: int, n_dims: int = 8, seed: int = 0) -> FeatureMatrix:
    rng = np.random.default_rng(seed)
    return FeatureMatrix(rng.normal(size=(n_frames, n_dims)).astype(np.float32))


@pytest.fixture
def tiny_corpus(tmp_path):
    """Two utterances, transcripts 'the cat' / 'the dog', 100 frames x 8 dims.

    Hand counts: keys {the, cat, dog}; pools the:2, cat:1, dog:1; 4 segments.
    """
    entries = []
    for i, (uid, words) in enumerate([("u1", ("the", "cat")), ("u2", ("the", "dog"))]):
        path = tmp_path / f"{uid}.adaf"
        write_features(make_matrix(100, seed=i), path)
        entries.append(ManifestEntry(uid, path, words))
    manifest = CorpusManifest(tuple(entries))
    manifest_path = tmp_path / "manifest.tsv"
    save_manifest(manifest, manifest_path)
    ctm_path = tmp_path / "align.ctm"
    ctm_path.write_text(TINY_CTM)
    alignments = parse_ctm(TINY_CTM)
    return {
        "dir": tmp_path,
        "manifest": manifest,
        "manifest_path": manifest_path,
        "ctm_path": ctm_path,
        "alignments": alignments,
    }


@pytest.fixture
def tiny_dict(tiny_corpus) -> AudioDictionary:
    return audiodict.build(tiny_corpus["manifest"], tiny_corpus["alignments"])


def synth_corpus(
    base: Path,
    n_utts: int,
    n_dims: int = 8,
    min_words: int = 5,
    max_words: int = 15,
    frames_per_word: int = 12,
    seed: int = 1234,
    vocab: tuple[str, ...] = (
        "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
        "hotel", "india", "juliett", "kilo", "lima", "mike", "november",
    ),
):
    """Write a synthetic corpus with exact word alignments.

    Every word occupies ``frames_per_word`` frames, so alignments are exact
    and every vocabulary word lands in the dictionary.
    """
    base.mkdir(parents=True, exist_ok=True)
    rng = Random(seed)
    nprng = np.random.default_rng(seed)
    entries = []
    ctm_lines = []
    sec_per_word = frames_per_word / 100.0
    for i in range(n_utts):
        uid = f"utt{i:05d}"
        n_words = rng.randint(min_words, max_words)
        words = tuple(vocab[rng.randrange(len(vocab))] for _ in range(n_words))
        n_frames = n_words * frames_per_word
        feats = FeatureMatrix(nprng.normal(size=(n_frames, n_dims)).astype(np.float32))
        path = base / f"{uid}.adaf"
        write_features(feats, path)
        entries.append(ManifestEntry(uid, path, words))
        for w_idx, word in enumerate(words):
            ctm_lines.append(f"{uid} 1 {w_idx * sec_per_word:.2f} {sec_per_word:.2f} {word}")
    manifest = CorpusManifest(tuple(entries))
    manifest_path = base / "manifest.tsv"
    save_manifest(manifest, manifest_path)
    ctm_text = "\n".join(ctm_lines) + "\n"
    ctm_path = base / "align.ctm"
    ctm_path.write_text(ctm_text)
    return {
        "manifest": manifest,
        "manifest_path": manifest_path,
        "ctm_path": ctm_path,
        "alignments": parse_ctm(ctm_text),
    }


def inmemory_corpus(
    n_utts: int,
    vocab: tuple[str, ...] = (
        "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf",
        "hotel", "india", "juliett", "kilo", "lima",
    ),
    min_words: int = 5,
    max_words: int = 15,
    frames_per_word: int = 2,
    n_dims: int = 4,
    seed: int = 0,
    segments_per_key: int = 3,
):
    """Fast file-less corpus: utterances, exact alignments, and a dictionary
    covering the whole vocabulary."""
    from alignedaug import AlignedUtterance, TokenSpan, Utterance
    from alignedaug.audiodict import SegmentEntry

    rng = Random(seed)
    nprng = np.random.default_rng(seed)
    pairs = []
    for i in range(n_utts):
        uid = f"m{i:05d}"
        words = tuple(vocab[rng.randrange(len(vocab))] for _ in range(rng.randint(min_words, max_words)))
        feats = FeatureMatrix(
            nprng.normal(size=(len(words) * frames_per_word, n_dims)).astype(np.float32)
        )
        spans = tuple(
            TokenSpan(w, j * frames_per_word, (j + 1) * frames_per_word)
            for j, w in enumerate(words)
        )
        pairs.append((Utterance(uid, feats, words), AlignedUtterance(uid, spans)))
    entries = {}
    seg_id = 0
    for w in vocab:
        pool = []
        for _ in range(segments_per_key):
            n = rng.randint(1, 2 * frames_per_word)
            pool.append(
                SegmentEntry(seg_id, f"src-{w}", 0, n, nprng.normal(size=(n, n_dims)).astype(np.float32))
            )
            seg_id += 1
        entries[w] = pool
    return pairs, AudioDictionary(n_dims, entries)


FIG1_SENTENCE = "mister quilter is the apostle of the middle classes"

# Runner-up scores are far enough below the winner that softmax sampling
# picks the top candidate with probability 1 - e^-200.
FIG1_MOCK_TSV = """\
apostle\tpresident\t-0.1
apostle\tfather\t-200.0
quilter\tlay\t-0.1
quilter\tquilter\t-200.0
"""


@pytest.fixture
def fig1_setup(tmp_path):
    """The worked aligned-replacement example: 'apostle' -> 'president' and
    'quilter' -> 'lay', with a dictionary that holds both target tokens."""
    sentences = {
        "f1": tuple(FIG1_SENTENCE.split()),
        "f2": ("the", "president", "will", "lay", "the", "foundation"),
    }
    entries = []
    ctm_lines = []
    nprng = np.random.default_rng(99)
    for uid, words in sentences.items():
        n_frames = len(words) * 10
        write_features(
            FeatureMatrix(nprng.normal(size=(n_frames, 8)).astype(np.float32)),
            tmp_path / f"{uid}.adaf",
        )
        entries.append(ManifestEntry(uid, tmp_path / f"{uid}.adaf", words))
        for w_idx, w in enumerate(words):
            ctm_lines.append(f"{uid} 1 {w_idx * 0.1:.2f} 0.10 {w}")
    manifest = CorpusManifest(tuple(entries))
    save_manifest(manifest, tmp_path / "manifest.tsv")
    ctm_text = "\n".join(ctm_lines) + "\n"
    (tmp_path / "align.ctm").write_text(ctm_text)
    mock_path = tmp_path / "fig1_mock.tsv"
    mock_path.write_text(FIG1_MOCK_TSV)
    alignments = parse_ctm(ctm_text)
    return {
        "dir": tmp_path,
        "manifest": manifest,
        "manifest_path": tmp_path / "manifest.tsv",
        "ctm_path": tmp_path / "align.ctm",
        "alignments": alignments,
        "mock_path": mock_path,
        "dict": audiodict.build(manifest, alignments),
    }
