"""Read-only analyses over a trained embedding model.

All similarity is cosine over the input vectors.  Result lists are
ordered by similarity descending with ties broken lexicographically by
token, so equal models always give equal output.
"""

from __future__ import annotations

from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .embedder import EmbeddingModel
from .errors import MalformedToken, NonMoveVocabulary, TooFewTokens
from .tokens import parse_token


class Neighbor(NamedTuple):
    token: str
    similarity: float


class Pair(NamedTuple):
    a: str
    b: str
    similarity: float


class DestStatsRow(NamedTuple):
    n: int
    count: int
    percent: float


def _unit(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def cosine(model: EmbeddingModel, a: str, b: str) -> float:
    norm = model.normalized()
    return float(norm[model.vocab.id_of(a)] @ norm[model.vocab.id_of(b)])


def _ranked(model: EmbeddingModel, sims: np.ndarray, exclude, k: int) -> List[Neighbor]:
    """Top-k by similarity, ties lexicographic, excluded ids dropped."""
    sims = sims.copy()
    for i in exclude:
        sims[i] = -np.inf
    tokens = np.asarray(model.vocab.tokens)
    order = np.lexsort((tokens, -sims))
    out = []
    for i in order:
        if np.isneginf(sims[i]):
            continue
        out.append(Neighbor(model.vocab.tokens[i], float(sims[i])))
        if len(out) == k:
            break
    return out


def most_similar(model: EmbeddingModel, token: str, k: int = 10) -> List[Neighbor]:
    tid = model.vocab.id_of(token)
    norm = model.normalized()
    sims = norm @ norm[tid]
    return _ranked(model, sims, [tid], k)


def analogy(model: EmbeddingModel, positive: Sequence[str], negative: Sequence[str] = (),
            k: int = 10) -> List[Neighbor]:
    """Nearest tokens to sum(unit positive) - sum(unit negative),
    excluding the inputs."""
    if not positive:
        raise ValueError("positive token list must be non-empty")
    pos_ids = [model.vocab.id_of(t) for t in positive]
    neg_ids = [model.vocab.id_of(t) for t in negative]
    norm = model.normalized()
    target = norm[pos_ids].sum(axis=0)
    if neg_ids:
        target = target - norm[neg_ids].sum(axis=0)
    target = _unit(target)
    sims = norm @ target
    return _ranked(model, sims, set(pos_ids) | set(neg_ids), k)


def odd_one_out(model: EmbeddingModel, tokens: Sequence[str]) -> str:
    """The token least similar to the mean of the group's unit
    vectors."""
    ids = [model.vocab.id_of(t) for t in tokens]
    if len(ids) < 3:
        raise TooFewTokens(f"need at least 3 tokens, got {len(ids)}")
    norm = model.normalized()
    mean = norm[ids].mean(axis=0)
    mean = _unit(mean)
    sims = norm[ids] @ mean
    best = min(range(len(ids)), key=lambda i: (sims[i], tokens[i]))
    return tokens[best]


_BLOCK = 256


def extreme_pairs(model: EmbeddingModel, k: int = 10,
                  min_count: int = 0) -> Tuple[List[Pair], List[Pair]]:
    """Exhaustive scan of unordered token pairs: the k highest-cosine
    and k lowest-cosine pairs, over tokens with count >= min_count."""
    vocab = model.vocab
    ids = np.flatnonzero(vocab.counts >= min_count)
    n = len(ids)
    norm = model.normalized()[ids]
    tokens = [vocab.tokens[i] for i in ids]
    cand_top: List[Tuple[float, str, str]] = []
    cand_bot: List[Tuple[float, str, str]] = []
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        sims = norm[start:stop] @ norm.T
        rows, cols = np.indices(sims.shape)
        rows += start
        upper = cols > rows  # each unordered pair once
        flat_sims = sims[upper]
        if flat_sims.size == 0:
            continue
        flat_rows = rows[upper]
        flat_cols = cols[upper]
        take = min(k, flat_sims.size)
        hi = np.argpartition(-flat_sims, take - 1)[:take]
        lo = np.argpartition(flat_sims, take - 1)[:take]
        for sel, bucket in ((hi, cand_top), (lo, cand_bot)):
            for j in sel:
                bucket.append((float(flat_sims[j]), tokens[flat_rows[j]], tokens[flat_cols[j]]))
    cand_top.sort(key=lambda t: (-t[0], t[1], t[2]))
    cand_bot.sort(key=lambda t: (t[0], t[1], t[2]))
    top = [Pair(a, b, s) for s, a, b in cand_top[:k]]
    bottom = [Pair(a, b, s) for s, a, b in cand_bot[:k]]
    return top, bottom


def _move_fields(tokens: Sequence[str]):
    """Per-token move attributes; kind code -1 marks non-move tokens."""
    n = len(tokens)
    kind = np.full(n, -1, dtype=np.int8)
    color = np.zeros(n, dtype=np.int8)
    origin = np.zeros(n, dtype=np.int8)
    dest = np.zeros(n, dtype=np.int8)
    kinds = "PNBRQK"
    for i, text in enumerate(tokens):
        try:
            parsed = parse_token(text)
        except MalformedToken:
            continue
        if parsed.kind != "move":
            continue
        kind[i] = kinds.index(parsed.piece.kind)
        color[i] = 1 if parsed.piece.color == "white" else 0
        origin[i] = parsed.origin
        dest[i] = parsed.dest
    return kind, color, origin, dest


def destination_stats(model: EmbeddingModel, thresholds: Sequence[int] = (3, 4, 5, 6, 7),
                      k: int = 10) -> List[DestStatsRow]:
    """For every move token, count neighbors in its top-k that are the
    same piece kind and color moving to the same destination from a
    different origin; report how many tokens clear each threshold."""
    vocab = model.vocab
    kind, color, origin, dest = _move_fields(vocab.tokens)
    move_ids = np.flatnonzero(kind >= 0)
    v = len(vocab)
    if v and len(move_ids) * 2 < v:
        raise NonMoveVocabulary(
            f"only {len(move_ids)} of {v} vocabulary tokens are move tokens"
        )
    norm = model.normalized()
    take = min(k, v - 1)
    qualifying = np.zeros(len(move_ids), dtype=np.int64)
    for start in range(0, len(move_ids), _BLOCK):
        block = move_ids[start:start + _BLOCK]
        sims = norm[block] @ norm.T
        sims[np.arange(len(block)), block] = -np.inf
        nb = np.argpartition(-sims, take - 1, axis=1)[:, :take]
        for r, i in enumerate(block):
            j = nb[r]
            q = ((kind[j] == kind[i]) & (color[j] == color[i])
                 & (dest[j] == dest[i]) & (origin[j] != origin[i]))
            qualifying[start + r] = int(q.sum())
    rows = []
    total = len(move_ids)
    for n in thresholds:
        count = int((qualifying >= n).sum())
        percent = 100.0 * count / total if total else 0.0
        rows.append(DestStatsRow(int(n), count, percent))
    return rows
