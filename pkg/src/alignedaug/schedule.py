"""Static mixture schedule: which sentences get augmented, and how many
tokens change inside a selected sentence."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class SentenceAssignment(Enum):
    ALIGNED = "aligned"
    DICT_ONLY = "dict-only"
    UNCHANGED = "unchanged"


@dataclass(frozen=True)
class MixtureSchedule:
    """Per-sentence probabilities and per-token fractions.

    ``p_aligned_sent`` of sentences get the aligned replacement treatment,
    ``p_dict_sent`` get audio-dictionary-only replacement, and the rest pass
    through untouched; the assignments are mutually exclusive per sentence.
    """

    p_aligned_sent: float
    f_aligned_tok: float
    p_dict_sent: float
    f_dict_tok: float

    def __post_init__(self):
        for name in ("p_aligned_sent", "f_aligned_tok", "p_dict_sent", "f_dict_tok"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p_aligned_sent + self.p_dict_sent > 1.0:
            raise ValueError("sentence probabilities sum to more than 1")


LIBRI100 = MixtureSchedule(0.50, 0.20, 0.15, 0.20)
LIBRI960 = MixtureSchedule(0.30, 0.20, 0.21, 0.15)

PRESETS = {"libri100": LIBRI100, "libri960": LIBRI960}


def assign_mode(u: float, s: MixtureSchedule) -> SentenceAssignment:
    """Map one uniform(0,1) draw to a sentence-level assignment."""
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u={u} outside [0, 1)")
    if u < s.p_aligned_sent:
        return SentenceAssignment.ALIGNED
    if u < s.p_aligned_sent + s.p_dict_sent:
        return SentenceAssignment.DICT_ONLY
    return SentenceAssignment.UNCHANGED


def n_replacements(n_tokens: int, f: float) -> int:
    """How many tokens to replace in a selected sentence of ``n_tokens``.

    Rounds half up and never returns 0 for f > 0: a selected sentence must
    change, even a one-word one.
    """
    if n_tokens < 1:
        raise ValueError("n_tokens must be >= 1")
    if f == 0.0:
        return 0
    return max(1, math.floor(f * n_tokens + 0.5))
