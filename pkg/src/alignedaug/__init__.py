"""On-the-fly aligned data augmentation for speech recognition corpora.

Builds an audio dictionary from forced alignments and generates unseen
audio/text training pairs by replacing transcript tokens together with their
time-aligned feature segments, plus the evaluation statistics (micro WER,
approximate randomization significance testing) used to compare systems.
"""

from .alignment import AlignedUtterance, TokenSpan, parse_ctm, to_frames, validate
from .audiodict import (
    AudioDictionary,
    BuildOptions,
    DictStats,
    SegmentEntry,
    build,
    load,
    sample,
    save,
    stats,
)
from .augment import (
    AugmentConfig,
    AugmentMode,
    AugmentTrace,
    MaskRect,
    Replacement,
    augment_pairs,
    augment_stream,
    augment_utterance,
    mask_span,
    spec_augment,
    splice,
    stable_hash,
    utterance_seed,
)
from .candidates import (
    CandidateSet,
    HttpPredictor,
    MockPredictor,
    choose,
    lm_candidates,
    random_token,
)
from .errors import AlignedAugError
from .evaluate import (
    ScoredExample,
    SigTestConfig,
    average_runs,
    bonferroni,
    corpus_wer,
    randomization_test,
    wer_counts,
)
from .features import (
    CorpusManifest,
    FbankConfig,
    FeatureMatrix,
    ManifestEntry,
    Utterance,
    extract_fbank,
    filter_corpus,
    load_manifest,
    read_features,
    save_manifest,
    write_features,
)
from .schedule import (
    LIBRI100,
    LIBRI960,
    MixtureSchedule,
    SentenceAssignment,
    assign_mode,
    n_replacements,
)

__version__ = "0.1.0"
