"""Micro word error rate and approximate randomization significance testing.

Score files are TSV ``utt_id<TAB>ref_len<TAB>errors_run1[,errors_run2,...]``
per system; hypothesis/reference files are TSV ``utt_id<TAB>tokens...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Sequence

from .errors import EmptyReference, LengthMismatch

_SUB, _DEL, _INS = 0, 1, 2  # tie-break preference order


@dataclass(frozen=True)
class ScoredExample:
    """Per-utterance edit errors, one value per training run."""

    utt_id: str
    ref_len: int
    errors_per_run: tuple[float, ...]

    def __post_init__(self):
        if self.ref_len < 0:
            raise ValueError("ref_len must be >= 0")
        if not self.errors_per_run:
            raise ValueError("need at least one run")
        for e in self.errors_per_run:
            if not (e >= 0 and e == e and e != float("inf")):
                raise ValueError(f"bad error value {e}")


@dataclass(frozen=True)
class SigTestConfig:
    n_shuffles: int = 1000
    swap_probability: float = 0.5
    alpha: float = 0.01
    n_comparisons: int = 1

    def __post_init__(self):
        if self.n_shuffles < 1:
            raise ValueError("n_shuffles must be >= 1")
        if not 0.0 < self.swap_probability < 1.0:
            raise ValueError("swap_probability must lie strictly between 0 and 1")


def wer_counts(ref: Sequence[str], hyp: Sequence[str]) -> tuple[int, int, int, int]:
    """Minimal-edit-distance counts (substitutions, deletions, insertions,
    reference length). All edits cost 1; ties in the lattice prefer
    substitution over deletion over insertion, which only affects the
    decomposition, never the total.
    """
    m, n = len(ref), len(hyp)
    # prev[j] = (total, S, D, I) for ref[:i] vs hyp[:j]
    prev = [(j, 0, 0, j) for j in range(n + 1)]
    for i in range(1, m + 1):
        cur = [(i, 0, i, 0)]
        ri = ref[i - 1]
        for j in range(1, n + 1):
            diag, up, left = prev[j - 1], prev[j], cur[j - 1]
            sub_cost = 0 if ri == hyp[j - 1] else 1
            options = (
                (diag[0] + sub_cost, _SUB, diag[1] + sub_cost, diag[2], diag[3]),
                (up[0] + 1, _DEL, up[1], up[2] + 1, up[3]),
                (left[0] + 1, _INS, left[1], left[2], left[3] + 1),
            )
            best = min(options)
            cur.append((best[0], best[2], best[3], best[4]))
        prev = cur
    total, s, d, ins = prev[n]
    assert total == s + d + ins
    return s, d, ins, m


def pair_wer(ref: Sequence[str], hyp: Sequence[str]) -> float:
    s, d, i, ref_len = wer_counts(ref, hyp)
    if ref_len == 0:
        raise EmptyReference("WER undefined for an empty reference")
    return (s + d + i) / ref_len


def corpus_wer(examples: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Micro average: total edit errors over total reference tokens."""
    errors = 0
    ref_tokens = 0
    for ref, hyp in examples:
        s, d, i, ref_len = wer_counts(ref, hyp)
        errors += s + d + i
        ref_tokens += ref_len
    if ref_tokens == 0:
        raise EmptyReference("corpus reference is empty")
    return errors / ref_tokens


def average_runs(e: ScoredExample) -> float:
    """Collapse one example's runs to their mean; valid because the
    reference length is the same in every run."""
    return sum(e.errors_per_run) / len(e.errors_per_run)


def _statistic(sum_a: float, sum_b: float, denom: float) -> float:
    return abs(sum_a - sum_b) / denom


def _null_statistics(
    a: Sequence[float],
    b: Sequence[float],
    denom: float,
    cfg: SigTestConfig,
    rng: Random,
) -> tuple[bool, list[float]]:
    """Test statistics under the swap null. Exact enumeration of all 2^n
    sign assignments when that is no more work than the requested shuffle
    count, Monte-Carlo otherwise."""
    n = len(a)
    sum_a, sum_b = sum(a), sum(b)
    exact = n <= 30 and 2**n <= cfg.n_shuffles
    stats = []
    if exact:
        for bits in range(2**n):
            sa, sb = sum_a, sum_b
            for i in range(n):
                if bits >> i & 1:
                    sa += b[i] - a[i]
                    sb += a[i] - b[i]
            stats.append(_statistic(sa, sb, denom))
    else:
        for _ in range(cfg.n_shuffles):
            sa, sb = sum_a, sum_b
            for i in range(n):
                if rng.random() < cfg.swap_probability:
                    sa += b[i] - a[i]
                    sb += a[i] - b[i]
            stats.append(_statistic(sa, sb, denom))
    return exact, stats


def randomization_test(
    a: Sequence[float],
    b: Sequence[float],
    ref_lens: Sequence[int],
    cfg: SigTestConfig = SigTestConfig(),
    rng: Random | None = None,
) -> float:
    """Approximate randomization test on per-example averaged errors.

    The statistic is the absolute micro-WER difference
    |sum(a) - sum(b)| / sum(ref_lens). Each shuffle swaps the two systems'
    scores per example with the configured probability; the p-value is
    (count of shuffles with statistic >= observed, + 1) / (R + 1). When all
    2^n sign assignments fit in the shuffle budget the test enumerates them
    exactly and p = count / 2^n without the +1 smoothing.
    """
    if not (len(a) == len(b) == len(ref_lens)):
        raise LengthMismatch(f"lengths {len(a)}, {len(b)}, {len(ref_lens)}")
    if len(a) == 0:
        raise LengthMismatch("need at least one example")
    rng = rng if rng is not None else Random()
    denom = float(sum(ref_lens))
    if denom <= 0:
        raise EmptyReference("total reference length must be positive")
    observed = _statistic(sum(a), sum(b), denom)
    exact, stats = _null_statistics(a, b, denom, cfg, rng)
    count = sum(1 for s in stats if s >= observed)
    if exact:
        return count / len(stats)
    return (count + 1) / (cfg.n_shuffles + 1)


def bonferroni(alpha: float, m: int) -> float:
    """Corrected per-comparison significance level alpha / m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return alpha / m


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def load_scores(path: str | Path) -> list[ScoredExample]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected utt_id<TAB>ref_len<TAB>errors")
            errors = tuple(float(x) for x in parts[2].split(","))
            out.append(ScoredExample(parts[0], int(parts[1]), errors))
    return out


def save_scores(examples: Sequence[ScoredExample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in examples:
            runs = ",".join(format(x, "g") for x in e.errors_per_run)
            fh.write(f"{e.utt_id}\t{e.ref_len}\t{runs}\n")


def load_trans_tsv(path: str | Path) -> dict[str, tuple[str, ...]]:
    """utt_id -> token tuple; a line with no second field is an empty
    hypothesis."""
    out: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            utt_id = parts[0]
            if utt_id in out:
                raise ValueError(f"{path}:{line_no}: duplicate utt_id {utt_id!r}")
            tokens = tuple(parts[1].lower().split()) if len(parts) > 1 else ()
            out[utt_id] = tokens
    return out
