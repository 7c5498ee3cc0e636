"""Candidate backends behind one contract.

A backend scores whole-word candidates for one masked position given the
rest of the sentence. Every backend must be deterministic for a fixed model
and request, return scores in non-increasing order, and only ever emit
single whole words (no whitespace, no subword fragments).
"""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Protocol, Sequence

BOS = "<s>"
EOS = "</s>"


class Backend(Protocol):
    model_id: str
    vocab_size: int

    def predict_position(
        self, tokens: Sequence[str], position: int, top_k: int
    ) -> list[tuple[str, float]]:
        ...

    def retokenize(self, word: str) -> list[str]:
        ...


class BigramBackend:
    """Deterministic bigram scorer trained from a plain-text corpus.

    Candidates for a masked position are ranked by the smoothed product
    P(candidate | left word) * P(right word | candidate). Ties break
    alphabetically so identical requests always yield identical responses.
    """

    def __init__(self, model_id: str, vocab: list[str], fwd: Counter, totals: Counter, alpha: float = 0.1):
        self.model_id = model_id
        self.vocab = sorted(vocab)
        self.fwd = fwd
        self.totals = totals
        self.alpha = alpha
        self.vocab_size = len(self.vocab)

    @classmethod
    def train_from_text(cls, path: str | Path, alpha: float = 0.1) -> "BigramBackend":
        """One sentence per line, whitespace tokens, case-folded here."""
        fwd: Counter = Counter()
        totals: Counter = Counter()
        vocab: set[str] = set()
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                words = raw.lower().split()
                if not words:
                    continue
                vocab.update(words)
                seq = [BOS, *words, EOS]
                for prev, cur in zip(seq, seq[1:]):
                    fwd[(prev, cur)] += 1
                    totals[prev] += 1
        if not vocab:
            raise ValueError(f"{path}: no training sentences")
        return cls(f"bigram:{Path(path).name}", sorted(vocab), fwd, totals, alpha)

    def _log_cond(self, cur: str, prev: str) -> float:
        denom = self.totals.get(prev, 0) + self.alpha * (self.vocab_size + 2)
        return math.log((self.fwd.get((prev, cur), 0) + self.alpha) / denom)

    def predict_position(self, tokens, position, top_k):
        left = tokens[position - 1].lower() if position > 0 else BOS
        right = tokens[position + 1].lower() if position < len(tokens) - 1 else EOS
        scored = [
            (self._log_cond(cand, left) + self._log_cond(right, cand), cand)
            for cand in self.vocab
        ]
        scored.sort(key=lambda sc: (-sc[0], sc[1]))
        return [(cand, score) for score, cand in scored[:top_k]]

    def retokenize(self, word: str) -> list[str]:
        return word.split()


class HFBackend:
    """transformers fill-mask backend.

    Each masked position is predicted independently with the other words as
    context. Subword handling follows the single-piece rule: only candidates
    whose lowercase surface re-tokenizes (with a word boundary) to exactly
    one piece survive, unless ``multi_piece`` enables greedy completion of
    longer words. Loaded only when selected, so the rest of the server has
    no torch dependency.
    """

    def __init__(self, model_name: str = "roberta-base", multi_piece: bool = False,
                 candidate_factor: int = 8, max_pieces: int = 4):
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModelForMaskedLM.from_pretrained(model_name).eval()
        self.model_id = model_name
        self.vocab_size = self.tokenizer.vocab_size
        self.multi_piece = multi_piece
        self.candidate_factor = candidate_factor
        self.max_pieces = max_pieces

    def _is_single_whole_word(self, word: str) -> bool:
        return len(self.retokenize(word)) == 1

    def retokenize(self, word: str) -> list[str]:
        # Leading space marks a word boundary for byte-level BPE tokenizers.
        return self.tokenizer.tokenize(" " + word.strip())

    def _mask_logprobs(self, tokens, position):
        text_tokens = list(tokens)
        text_tokens[position] = self.tokenizer.mask_token
        text = " ".join(text_tokens)
        enc = self.tokenizer(text, return_tensors="pt")
        with self._torch.no_grad():
            logits = self.model(**enc).logits[0]
        mask_idx = (enc["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()[0, 0]
        return self._torch.log_softmax(logits[mask_idx], dim=-1), enc, mask_idx

    def _complete_greedy(self, tokens, position, first_piece_id, first_lp):
        """Extend a word-initial piece with its best continuations until the
        next piece would start a new word."""
        piece_ids = [int(first_piece_id)]
        total_lp = float(first_lp)
        for _ in range(self.max_pieces - 1):
            surface = self.tokenizer.decode(piece_ids).strip()
            probe = list(tokens)
            probe[position] = surface + self.tokenizer.mask_token
            enc = self.tokenizer(" ".join(probe), return_tensors="pt")
            with self._torch.no_grad():
                logits = self.model(**enc).logits[0]
            mask_idx = (enc["input_ids"][0] == self.tokenizer.mask_token_id).nonzero()[0, 0]
            lps = self._torch.log_softmax(logits[mask_idx], dim=-1)
            best = int(lps.argmax())
            piece = self.tokenizer.convert_ids_to_tokens(best)
            if piece.startswith("Ġ") or piece.startswith(" "):
                break
            decoded = self.tokenizer.decode([best])
            if not decoded.strip() or " " in decoded.strip():
                break
            piece_ids.append(best)
            total_lp += float(lps[best])
        word = self.tokenizer.decode(piece_ids).strip().lower()
        return word, total_lp

    def predict_position(self, tokens, position, top_k):
        lps, _, _ = self._mask_logprobs(tokens, position)
        k = min(top_k * self.candidate_factor, lps.shape[-1])
        scores, ids = self._torch.topk(lps, k)
        out: list[tuple[str, float]] = []
        seen: set[str] = set()
        for lp, idx in zip(scores.tolist(), ids.tolist()):
            word = self.tokenizer.decode([idx]).strip().lower()
            if not word or " " in word:
                continue
            if not self._is_single_whole_word(word):
                if not self.multi_piece:
                    continue
                word, lp = self._complete_greedy(tokens, position, idx, lp)
                if not word or " " in word or not self._is_single_whole_word(word):
                    continue
            if word in seen:
                continue
            seen.add(word)
            out.append((word, float(lp)))
            if len(out) == top_k:
                break
        out.sort(key=lambda c: -c[1])
        return out
