"""Exception types shared across the pipeline.

Everything raised by this package derives from AlignedAugError so callers
can catch one base class at process boundaries.
"""


class AlignedAugError(Exception):
    """Base class for all errors raised by alignedaug."""


# ---- feature files / fbank -------------------------------------------------

class BadMagic(AlignedAugError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(AlignedAugError):
    """File is shorter (or longer) than its header promises."""


class NonFiniteValue(AlignedAugError):
    """A feature value is NaN or infinite."""


class IoFailure(AlignedAugError):
    """Underlying OS write failed."""


class BadSampleRate(AlignedAugError):
    """Input audio is not at the supported sample rate."""


class MissingFeatureFile(AlignedAugError):
    """A manifest entry points at a feature file that cannot be read."""


class ManifestError(AlignedAugError):
    """Manifest violates its invariants (duplicate or empty utterance ids)."""


# ---- alignments ------------------------------------------------------------

class NegativeTime(AlignedAugError):
    """Alignment timestamps must satisfy tbeg >= 0 and tdur > 0."""


class MalformedLine(AlignedAugError):
    """A CTM line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotonicAlignment(AlignedAugError):
    """Spans of one utterance overlap beyond what rounding repair can fix."""

    def __init__(self, utt_id: str, message: str = ""):
        super().__init__(f"{utt_id}: {message}" if message else utt_id)
        self.utt_id = utt_id


class SpanOutOfRange(AlignedAugError):
    """A token span lies outside the feature matrix."""

    def __init__(self, utt_id: str, token: str, message: str = ""):
        detail = f"{utt_id}/{token}"
        super().__init__(f"{detail}: {message}" if message else detail)
        self.utt_id = utt_id
        self.token = token


class EmptySpanAfterClamp(AlignedAugError):
    """Clamping a span to the feature length left it with zero frames."""


# ---- audio dictionary ------------------------------------------------------

class UnknownUtterance(AlignedAugError):
    """An alignment references an utterance id absent from the corpus."""

    def __init__(self, utt_id: str):
        super().__init__(utt_id)
        self.utt_id = utt_id


class DimensionMismatch(AlignedAugError):
    """Feature dimensionality differs between inputs that must agree."""


class VersionMismatch(AlignedAugError):
    """Dictionary file was written with an unsupported format version."""


# ---- candidate predictors --------------------------------------------------

class EmptyKeySet(AlignedAugError):
    """Random token sampling needs a non-empty key set."""


class EmptyCandidates(AlignedAugError):
    """Cannot choose from an empty candidate list."""


class ServerUnreachable(AlignedAugError):
    """Could not connect to the language-model endpoint."""


class ProtocolError(AlignedAugError):
    """Language-model endpoint answered with a malformed payload."""


class Timeout(AlignedAugError):
    """Language-model endpoint did not answer in time."""


# ---- evaluation ------------------------------------------------------------

class EmptyReference(AlignedAugError):
    """Word error rate is undefined for an empty reference."""


class LengthMismatch(AlignedAugError):
    """Paired score lists must have equal length."""
