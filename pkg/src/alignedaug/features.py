"""Acoustic feature matrices, binary feature-file I/O, log-mel extraction,
and corpus manifests with length filtering.

Feature files use the ADAF format: 4 magic bytes ``ADAF``, then n_frames and
n_dims as unsigned 32-bit little-endian integers, then the row-major payload
as IEEE-754 32-bit little-endian floats. Manifests are UTF-8 TSV with one
``utt_id<TAB>feature_path<TAB>transcript`` entry per line.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagic,
    BadSampleRate,
    IoFailure,
    ManifestError,
    MissingFeatureFile,
    NonFiniteValue,
    TruncatedFile,
)

ADAF_MAGIC = b"ADAF"
_ADAF_HEADER = struct.Struct("<4sII")

DEFAULT_FRAME_RATE = 100


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """A frames x dims grid of float32 acoustic features, row-major.

    ``frame_rate`` is frames per second; the default 100 corresponds to a
    10 ms hop. All values must be finite and n_dims must be positive.
    """

    data: np.ndarray
    frame_rate: int = DEFAULT_FRAME_RATE

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[1] <= 0:
            raise ValueError("n_dims must be positive")
        if arr.size and not np.isfinite(arr).all():
            raise NonFiniteValue("feature matrix contains non-finite values")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        object.__setattr__(self, "data", arr)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_dims(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class Utterance:
    """One training example: an id, its features, and the word transcript."""

    utt_id: str
    features: FeatureMatrix
    transcript: tuple[str, ...]

    def __post_init__(self):
        if not self.utt_id:
            raise ValueError("utt_id must be non-empty")
        object.__setattr__(self, "transcript", tuple(self.transcript))
        for tok in self.transcript:
            if not tok or tok.split() != [tok]:
                raise ValueError(f"bad transcript token {tok!r}")


@dataclass(frozen=True)
class ManifestEntry:
    utt_id: str
    feature_path: Path
    transcript: tuple[str, ...]


@dataclass(frozen=True)
class CorpusManifest:
    """Ordered corpus listing; utterance ids are unique within a manifest."""

    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for e in self.entries:
            if not e.utt_id:
                raise ManifestError("empty utt_id")
            if e.utt_id in seen:
                raise ManifestError(f"duplicate utt_id {e.utt_id!r}")
            seen.add(e.utt_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


# ---------------------------------------------------------------------------
# ADAF feature files
# ---------------------------------------------------------------------------

def write_features(m: FeatureMatrix, path: str | Path) -> None:
    """Write ``m`` to ``path`` in the ADAF format (bit-exact, deterministic)."""
    data = m.data
    if data.size and not np.isfinite(data).all():
        raise NonFiniteValue("refusing to write non-finite features")
    header = _ADAF_HEADER.pack(ADAF_MAGIC, m.n_frames, m.n_dims)
    payload = np.ascontiguousarray(data, dtype="<f4").tobytes()
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_features(path: str | Path, frame_rate: int = DEFAULT_FRAME_RATE) -> FeatureMatrix:
    """Read an ADAF file; byte-exact inverse of :func:`write_features`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _ADAF_HEADER.size:
        if blob[: len(ADAF_MAGIC)] != ADAF_MAGIC[: len(blob)]:
            raise BadMagic(f"{path}: not an ADAF file")
        raise TruncatedFile(f"{path}: incomplete header")
    magic, n_frames, n_dims = _ADAF_HEADER.unpack_from(blob)
    if magic != ADAF_MAGIC:
        raise BadMagic(f"{path}: expected {ADAF_MAGIC!r}, found {magic!r}")
    expected = _ADAF_HEADER.size + 4 * n_frames * n_dims
    if len(blob) < expected:
        raise TruncatedFile(f"{path}: expected {expected} bytes, found {len(blob)}")
    if len(blob) > expected:
        raise TruncatedFile(f"{path}: {len(blob) - expected} trailing bytes")
    payload = np.frombuffer(blob, dtype="<f4", offset=_ADAF_HEADER.size)
    return FeatureMatrix(payload.reshape(n_frames, n_dims), frame_rate=frame_rate)


def read_feature_shape(path: str | Path) -> tuple[int, int]:
    """Read only (n_frames, n_dims) from an ADAF header."""
    with open(path, "rb") as fh:
        head = fh.read(_ADAF_HEADER.size)
    if len(head) < _ADAF_HEADER.size:
        raise TruncatedFile(f"{path}: incomplete header")
    magic, n_frames, n_dims = _ADAF_HEADER.unpack(head)
    if magic != ADAF_MAGIC:
        raise BadMagic(f"{path}: expected {ADAF_MAGIC!r}, found {magic!r}")
    return n_frames, n_dims


# ---------------------------------------------------------------------------
# Log-mel filterbank extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FbankConfig:
    """Log-mel extraction parameters. Defaults give 80-dim features at 100 fps."""

    sample_rate: int = 16000
    n_mels: int = 80
    window_ms: float = 25.0
    hop_ms: float = 10.0
    fft_size: int = 512
    fmin: float = 20.0
    fmax: float = 7600.0
    preemphasis: float = 0.97
    energy_floor: float = 1e-10

    @property
    def window_len(self) -> int:
        return round(self.sample_rate * self.window_ms / 1000.0)

    @property
    def hop_len(self) -> int:
        return round(self.sample_rate * self.hop_ms / 1000.0)

    @property
    def frame_rate(self) -> int:
        return round(1000.0 / self.hop_ms)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (np.power(10.0, np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: FbankConfig) -> np.ndarray:
    """Triangular mel filters as an (n_mels, fft_size//2 + 1) weight matrix."""
    n_bins = cfg.fft_size // 2 + 1
    mel_pts = np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bin_freqs = np.arange(n_bins) * cfg.sample_rate / cfg.fft_size
    fb = np.zeros((cfg.n_mels, n_bins), dtype=np.float64)
    for m in range(cfg.n_mels):
        lo, ctr, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rising = (bin_freqs - lo) / (ctr - lo)
        falling = (hi - bin_freqs) / (hi - ctr)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def extract_fbank(samples: Sequence[float] | np.ndarray, cfg: FbankConfig = FbankConfig()) -> FeatureMatrix:
    """Log-mel filterbank features from 16 kHz mono PCM samples.

    Produces 1 + floor((n_samples - window_len) / hop_len) frames; input
    shorter than one window yields an empty (0 x n_mels) matrix so degenerate
    clips can be skipped rather than crash a pipeline.
    """
    if cfg.sample_rate != 16000:
        raise BadSampleRate(f"expected 16000 Hz input, got {cfg.sample_rate}")
    x = np.asarray(samples, dtype=np.float64).ravel()
    win, hop = cfg.window_len, cfg.hop_len
    if x.size < win:
        return FeatureMatrix(np.zeros((0, cfg.n_mels), dtype=np.float32), frame_rate=cfg.frame_rate)
    n_frames = 1 + (x.size - win) // hop

    if cfg.preemphasis:
        x = np.concatenate(([x[0]], x[1:] - cfg.preemphasis * x[:-1]))
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = x[idx] * np.hamming(win)[None, :]
    power = np.abs(np.fft.rfft(frames, n=cfg.fft_size)) ** 2
    mel_energies = power @ mel_filterbank(cfg).T
    out = np.log(np.maximum(mel_energies, cfg.energy_floor))
    return FeatureMatrix(out.astype(np.float32), frame_rate=cfg.frame_rate)


# ---------------------------------------------------------------------------
# Manifests and corpus filtering
# ---------------------------------------------------------------------------

def load_manifest(path: str | Path) -> CorpusManifest:
    """Load a TSV manifest; transcripts are case-folded to lowercase here.

    Relative feature paths are resolved against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ManifestError(f"{path}:{line_no}: expected utt_id<TAB>path<TAB>transcript")
            utt_id, feat = parts[0], parts[1]
            transcript = tuple(parts[2].lower().split()) if len(parts) > 2 else ()
            feat_path = Path(feat)
            if not feat_path.is_absolute():
                feat_path = base / feat_path
            entries.append(ManifestEntry(utt_id, feat_path, transcript))
    return CorpusManifest(tuple(entries))


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    path = Path(path)
    base = path.parent.resolve()
    with open(path, "w", encoding="utf-8") as fh:
        for e in manifest.entries:
            feat = Path(e.feature_path)
            try:
                feat = feat.resolve().relative_to(base)
            except ValueError:
                pass
            fh.write(f"{e.utt_id}\t{feat}\t{' '.join(e.transcript)}\n")


def load_utterance(entry: ManifestEntry) -> Utterance:
    try:
        feats = read_features(entry.feature_path)
    except FileNotFoundError as exc:
        raise MissingFeatureFile(str(entry.feature_path)) from exc
    return Utterance(entry.utt_id, feats, entry.transcript)


def filter_corpus(manifest: CorpusManifest, max_frames: int = 3000, max_units: int = 80) -> CorpusManifest:
    """Drop entries with more than ``max_frames`` frames or more than
    ``max_units`` transcript tokens; order is preserved and the thresholds
    themselves are retained (the comparison is strict 'more than')."""
    kept = []
    for e in manifest.entries:
        try:
            n_frames, _ = read_feature_shape(e.feature_path)
        except FileNotFoundError as exc:
            raise MissingFeatureFile(str(e.feature_path)) from exc
        if n_frames <= max_frames and len(e.transcript) <= max_units:
            kept.append(e)
    return CorpusManifest(tuple(kept))
