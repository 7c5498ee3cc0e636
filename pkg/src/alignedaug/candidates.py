"""Replacement-token providers.

Three interchangeable sources sit behind one ``predict`` contract: a wire
client for the masked-LM server, a deterministic table-backed mock for
tests, and the random-token strategy that draws directly from the audio
dictionary's keys.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Protocol, Sequence

import requests

from .errors import (
    EmptyCandidates,
    EmptyKeySet,
    ProtocolError,
    ServerUnreachable,
    Timeout,
)


@dataclass(frozen=True)
class CandidateSet:
    """LM candidates for one transcript position, sorted by descending score."""

    position: int
    candidates: tuple[tuple[str, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        scores = [lp for _, lp in self.candidates]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("candidates must be sorted by descending logprob")


class Predictor(Protocol):
    def predict(self, tokens: Sequence[str], positions: Sequence[int], top_k: int) -> list[CandidateSet]:
        ...


def random_token(keys: Sequence[str], rng: Random, exclude_original: str) -> str:
    """Uniform draw over ``keys`` minus the original token.

    ``keys`` must be sorted and unique (the dictionary's canonical key order);
    sortedness makes the exclusion lookup O(log n) and pins the draw sequence
    for a given seed. Falls back to the original when it is the only key.
    """
    n = len(keys)
    if n == 0:
        raise EmptyKeySet("cannot sample from an empty key set")
    i = bisect_left(keys, exclude_original)
    present = i < n and keys[i] == exclude_original
    if not present:
        return keys[rng.randrange(n)]
    if n == 1:
        return exclude_original
    j = rng.randrange(n - 1)
    if j >= i:
        j += 1
    return keys[j]


def choose(cs: CandidateSet, rng: Random, temperature: float = 1.0) -> str:
    """Sample one candidate proportionally to softmax(logprob / temperature)."""
    if not cs.candidates:
        raise EmptyCandidates(f"position {cs.position}")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if len(cs.candidates) == 1:
        return cs.candidates[0][0]
    scaled = [lp / temperature for _, lp in cs.candidates]
    top = max(scaled)
    weights = [math.exp(s - top) for s in scaled]
    total = sum(weights)
    u = rng.random() * total
    acc = 0.0
    for (token, _), w in zip(cs.candidates, weights):
        acc += w
        if u < acc:
            return token
    return cs.candidates[-1][0]


def top1(cs: CandidateSet) -> str:
    if not cs.candidates:
        raise EmptyCandidates(f"position {cs.position}")
    return cs.candidates[0][0]


class MockPredictor:
    """Deterministic predictor backed by a TSV table.

    Table rows are ``original_token<TAB>candidate<TAB>logprob``; several rows
    may share an original token. The lookup key is the token currently at
    the masked position, so aligned replacement is testable without any
    server running.
    """

    def __init__(self, table: dict[str, list[tuple[str, float]]]):
        self.table = {
            tok: sorted(cands, key=lambda c: -c[1]) for tok, cands in table.items()
        }

    @classmethod
    def from_tsv(cls, path: str | Path) -> "MockPredictor":
        table: dict[str, list[tuple[str, float]]] = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{line_no}: expected original<TAB>candidate<TAB>logprob")
                table.setdefault(parts[0].lower(), []).append((parts[1].lower(), float(parts[2])))
        return cls(table)

    def predict(self, tokens, positions, top_k):
        out = []
        for p in positions:
            cands = tuple(self.table.get(tokens[p], ())[:top_k])
            out.append(CandidateSet(p, cands))
        return out


class HttpPredictor:
    """Client for the masked-LM server's wire protocol.

    POSTs ``{"tokens": [...], "mask_positions": [...], "top_k": K}`` to
    ``<endpoint>/predict`` and normalizes the response. Transport problems
    surface as errors, never as silently empty candidate sets.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def predict(self, tokens, positions, top_k):
        payload = {
            "tokens": list(tokens),
            "mask_positions": list(positions),
            "top_k": top_k,
        }
        try:
            resp = self._session.post(
                f"{self.endpoint}/predict", json=payload, timeout=self.timeout
            )
        except requests.exceptions.Timeout as exc:
            raise Timeout(f"{self.endpoint}: {exc}") from exc
        except requests.exceptions.ConnectionError as exc:
            raise ServerUnreachable(f"{self.endpoint}: {exc}") from exc
        if resp.status_code != 200:
            raise ProtocolError(f"{self.endpoint}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            body = resp.json()
            predictions = {int(p["position"]): p["candidates"] for p in body["predictions"]}
            out = []
            for pos in positions:
                if pos not in predictions:
                    raise KeyError(pos)
                cands = []
                for c in predictions[pos]:
                    token = str(c["token"]).lower()
                    if not token or token.split() != [token]:
                        raise ValueError(f"not a whole word: {c['token']!r}")
                    cands.append((token, float(c["logprob"])))
                cands.sort(key=lambda c: -c[1])
                out.append(CandidateSet(pos, tuple(cands[:top_k])))
            return out
        except (KeyError, TypeError, ValueError, requests.exceptions.JSONDecodeError) as exc:
            raise ProtocolError(f"{self.endpoint}: malformed response: {exc}") from exc


def lm_candidates(
    client: Predictor, tokens: Sequence[str], positions: Sequence[int], top_k: int
) -> list[CandidateSet]:
    """Fetch candidate sets for the given positions through a predictor.

    Positions must be valid indices into ``tokens`` and top_k >= 1.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    for p in positions:
        if not 0 <= p < len(tokens):
            raise ValueError(f"position {p} out of range for {len(tokens)} tokens")
    if not positions:
        return []
    return client.predict(tokens, positions, top_k)
