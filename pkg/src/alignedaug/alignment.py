"""Word-level forced-alignment parsing and validation.

The interchange format is CTM: one word per line as
``utt_id channel tbeg tdur word [conf]`` with times in seconds.
``#``-prefixed lines are comments. Times are converted to frame indices at a
fixed frame rate; silence and non-lexical markers are dropped because they
have no transcript counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import (
    EmptySpanAfterClamp,
    MalformedLine,
    NegativeTime,
    NonMonotonicAlignment,
    SpanOutOfRange,
)

SILENCE_TOKENS = frozenset({"<eps>", "sil", "sp", "spn", "<unk>"})


@dataclass(frozen=True)
class TokenSpan:
    """A word and its half-open frame interval [start_frame, end_frame)."""

    token: str
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if not self.token:
            raise ValueError("token must be non-empty")
        if self.start_frame >= self.end_frame:
            raise ValueError(
                f"empty span for {self.token!r}: [{self.start_frame}, {self.end_frame})"
            )

    @property
    def width(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class AlignedUtterance:
    """Ordered, non-overlapping token spans for one utterance."""

    utt_id: str
    spans: tuple[TokenSpan, ...]

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(self.spans))
        for prev, cur in zip(self.spans, self.spans[1:]):
            if prev.end_frame > cur.start_frame:
                raise NonMonotonicAlignment(
                    self.utt_id, f"{prev.token!r} overlaps {cur.token!r}"
                )

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(sp.token for sp in self.spans)


def round_half_up(x: float) -> int:
    """Round to nearest integer with exact .5 ties going up (not to even)."""
    return math.floor(x + 0.5)


def to_frames(tbeg: float, tdur: float, fps: int = 100) -> tuple[int, int]:
    """Convert a (start seconds, duration seconds) pair to frame indices.

    Guarantees a width of at least one frame so very short words survive
    quantization.
    """
    if tbeg < 0 or tdur <= 0:
        raise NegativeTime(f"tbeg={tbeg}, tdur={tdur}")
    start = round_half_up(tbeg * fps)
    end = max(start + 1, round_half_up((tbeg + tdur) * fps))
    return start, end


def parse_ctm(
    text: str | Iterable[str],
    fps: int = 100,
    silence_tokens: frozenset[str] = SILENCE_TOKENS,
) -> list[AlignedUtterance]:
    """Parse CTM lines into one AlignedUtterance per distinct utterance id.

    Lines are grouped by utt_id (output keeps first-appearance order) and
    sorted by start time within each group, so line order inside an utterance
    block does not matter. Tokens are case-folded. Spans whose rounded frame
    intervals collide have the earlier span truncated to the later span's
    start; a collision that cannot be repaired this way raises
    NonMonotonicAlignment.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    by_utt: dict[str, list[tuple[float, int, str, float]]] = {}
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 5:
            raise MalformedLine(line_no, f"expected >= 5 fields, found {len(parts)}")
        utt_id, _channel, tbeg_s, tdur_s, word = parts[:5]
        try:
            tbeg, tdur = float(tbeg_s), float(tdur_s)
        except ValueError:
            raise MalformedLine(line_no, f"bad timestamps {tbeg_s!r} {tdur_s!r}") from None
        if tbeg < 0 or tdur <= 0:
            raise MalformedLine(line_no, f"bad timestamps tbeg={tbeg} tdur={tdur}")
        by_utt.setdefault(utt_id, []).append((tbeg, line_no, word.lower(), tdur))

    out = []
    for utt_id, items in by_utt.items():
        items.sort(key=lambda it: it[0])
        spans: list[TokenSpan] = []
        for tbeg, _line_no, token, tdur in items:
            if token in silence_tokens:
                continue
            start, end = to_frames(tbeg, tdur, fps)
            if spans and spans[-1].end_frame > start:
                prev = spans[-1]
                if prev.start_frame >= start:
                    raise NonMonotonicAlignment(
                        utt_id, f"{prev.token!r} cannot be truncated before {token!r}"
                    )
                spans[-1] = TokenSpan(prev.token, prev.start_frame, start)
            spans.append(TokenSpan(token, start, end))
        out.append(AlignedUtterance(utt_id, tuple(spans)))
    return out


def validate(a: AlignedUtterance, n_frames: int) -> AlignedUtterance:
    """Check spans against a feature length, clamping overlong ends.

    Returns the (possibly clamped) utterance. Raises SpanOutOfRange for a
    negative start and EmptySpanAfterClamp when clamping leaves a span with
    no frames.
    """
    spans = []
    for sp in a.spans:
        if sp.start_frame < 0:
            raise SpanOutOfRange(a.utt_id, sp.token, f"start {sp.start_frame} < 0")
        end = min(sp.end_frame, n_frames)
        if sp.start_frame >= end:
            raise EmptySpanAfterClamp(
                f"{a.utt_id}/{sp.token!r}: [{sp.start_frame}, {sp.end_frame}) "
                f"vs {n_frames} frames"
            )
        spans.append(sp if end == sp.end_frame else TokenSpan(sp.token, sp.start_frame, end))
    return AlignedUtterance(a.utt_id, tuple(spans))


def load_ctm(path) -> list[AlignedUtterance]:
    with open(path, encoding="utf-8") as fh:
        return parse_ctm(fh)
