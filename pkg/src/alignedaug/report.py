"""Figure rendering for the reporting commands.

Every report command writes delimited text as its primary output; these
helpers render the matching matplotlib figure next to it when asked.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .audiodict import DictStats


def save_pool_histogram(st: DictStats, path: str | Path) -> Path:
    """Bar chart of pool-size distribution (how many keys have k segments)."""
    path = Path(path)
    sizes = sorted(st.pool_histogram)
    counts = [st.pool_histogram[s] for s in sizes]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([str(s) for s in sizes], counts, color="#4878a8")
    ax.set_xlabel("pool size (segments per token)")
    ax.set_ylabel("number of tokens")
    ax.set_title(f"{st.n_keys} keys, {st.n_segments} segments, {st.total_frames} frames")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_bench_chart(
    modes: Sequence[str], means: Sequence[float], ratios: Sequence[float], path: str | Path
) -> Path:
    path = Path(path)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.bar(modes, [m * 1e3 for m in means], color="#4878a8")
    ax1.set_ylabel("mean per-utterance time (ms)")
    ax1.tick_params(axis="x", rotation=30)
    ax2.bar(modes, ratios, color="#a85448")
    ax2.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax2.set_ylabel("ratio vs specaugment")
    ax2.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_null_histogram(
    null_stats: Sequence[float], observed: float, path: str | Path
) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(null_stats, bins=40, color="#4878a8", alpha=0.85)
    ax.axvline(observed, color="#a82828", linewidth=1.5, label=f"observed = {observed:.5f}")
    ax.set_xlabel("|micro-WER difference| under swap null")
    ax.set_ylabel("shuffles")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_wer_histogram(per_utt_wer: Sequence[float], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(per_utt_wer, bins=30, color="#4878a8")
    ax.set_xlabel("per-utterance WER")
    ax.set_ylabel("utterances")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
