"""Skip-gram negative-sampling embeddings, trained from scratch.

The objective per (center, context) pair maximizes
log sigmoid(u_ctx . v_c) + sum_neg log sigmoid(-u_neg . v_c)
where v are rows of the input matrix and u rows of the output matrix.
Deterministic mode draws every random number from one seeded PCG64
stream and touches the matrices from a single process, so equal seeds
give byte-identical models.  Parallel mode runs lock-free workers over
shared memory; updates may be lost benignly and runs are not
reproducible.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, fields, replace
from multiprocessing import Pool, RawArray
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import EmptyVocabulary, FormatError, NonFiniteLoss, UnknownToken

MODES = ("deterministic", "parallel")


@dataclass(frozen=True)
class Hyperparams:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_count: int = 5
    subsample_t: float = 1e-4
    seed: int = 1
    mode: str = "deterministic"
    dynamic_window: bool = True  # sampled radius (prose windows) vs full fixed span (board windows)

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives, and epochs must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.subsample_t < 0:
            raise ValueError("subsample_t must be >= 0 (0 disables)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def min_lr(self) -> float:
        return self.initial_lr / 1e4


class Vocabulary:
    """Token -> dense index plus counts, ordered by count desc, ties
    broken lexicographically."""

    def __init__(self, counts: dict):
        items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        self.tokens = [t for t, _ in items]
        self.counts = np.array([c for _, c in items], dtype=np.int64)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.total = int(self.counts.sum())

    @classmethod
    def from_items(cls, tokens: Sequence[str], counts: Sequence[int]) -> "Vocabulary":
        """Preserve an explicit order (used when loading model files)."""
        vocab = cls.__new__(cls)
        vocab.tokens = list(tokens)
        vocab.counts = np.array(counts, dtype=np.int64)
        vocab.index = {t: i for i, t in enumerate(vocab.tokens)}
        vocab.total = int(vocab.counts.sum())
        return vocab

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def id_of(self, token: str) -> int:
        try:
            return self.index[token]
        except KeyError:
            raise UnknownToken(f"not in vocabulary: {token!r}") from None


def build_vocab(corpus_path, min_count: int) -> Vocabulary:
    counts = Counter()
    with open(corpus_path, "r", encoding="utf-8") as handle:
        for line in handle:
            counts.update(line.split())
    kept = {t: c for t, c in counts.items() if c >= min_count}
    if not kept:
        raise EmptyVocabulary(f"no token occurs >= {min_count} times in {corpus_path}")
    return Vocabulary(kept)


class NegativeSampler:
    """Draws token ids with probability count^0.75 / sum count^0.75."""

    def __init__(self, vocab: Vocabulary, seed: int = 1):
        weights = np.asarray(vocab.counts, dtype=np.float64) ** 0.75
        self._cum = np.cumsum(weights)
        self._total = self._cum[-1]
        self._rng = np.random.default_rng(seed)

    def sample(self, rng, shape):
        """Ids with the given shape, randomness from the caller's rng."""
        return np.searchsorted(self._cum, rng.random(shape) * self._total)

    def draw(self, n: int):
        return self.sample(self._rng, n)


def negative_table(vocab: Vocabulary, seed: int = 1) -> NegativeSampler:
    return NegativeSampler(vocab, seed)


def _sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x):
    # log(1 + e^x), stable on both tails
    return np.logaddexp(0.0, x)


def sgns_update(center_vec, context_vec, negative_vecs, lr: float) -> float:
    """One gradient step on a single pair, updating all vectors in
    place from their pre-update values.  Returns the pair's loss
    (computed before the step).  With lr = 0 this is a pure loss
    evaluation."""
    negatives = np.atleast_2d(np.asarray(negative_vecs)) if len(negative_vecs) else None
    v_old = np.array(center_vec, dtype=np.float64, copy=True)
    ctx_old = np.array(context_vec, dtype=np.float64, copy=True)
    pos_score = float(ctx_old @ v_old)
    loss = float(_softplus(np.array(-pos_score)))
    g_pos = lr * (1.0 - float(_sigmoid(np.array(pos_score))))
    grad_v = g_pos * ctx_old
    context_vec += g_pos * v_old
    if negatives is not None:
        neg_old = np.array(negatives, dtype=np.float64, copy=True)
        scores = neg_old @ v_old
        loss += float(_softplus(scores).sum())
        g_neg = lr * (0.0 - _sigmoid(scores))
        grad_v = grad_v + g_neg @ neg_old
        negative_vecs += np.outer(g_neg, v_old).astype(negatives.dtype, copy=False)
    center_vec += grad_v.astype(np.asarray(center_vec).dtype, copy=False)
    return loss


class EmbeddingModel:
    def __init__(self, vocab: Vocabulary, input_matrix, output_matrix,
                 hyperparams: Hyperparams, epoch_losses: Sequence[float] = ()):
        self.vocab = vocab
        self.input = np.asarray(input_matrix)
        self.output = np.asarray(output_matrix)
        self.hyperparams = hyperparams
        self.epoch_losses = list(epoch_losses)
        self._normalized = None

    def vector(self, token: str):
        return self.input[self.vocab.id_of(token)]

    def normalized(self):
        """Unit-row float64 copy of the input matrix, cached."""
        if self._normalized is None:
            mat = self.input.astype(np.float64)
            norms = np.linalg.norm(mat, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            self._normalized = mat / norms
        return self._normalized


def _scatter_add(target, idx, vals):
    """target[idx] += vals with correct accumulation of repeats."""
    order = np.argsort(idx, kind="stable")
    si = idx[order]
    sv = vals[order]
    cuts = np.flatnonzero(np.r_[True, si[1:] != si[:-1]])
    target[si[cuts]] += np.add.reduceat(sv, cuts, axis=0)


class _SentenceKernel:
    """Per-sentence batched SGNS update over id arrays."""

    def __init__(self, w_in, w_out, sampler: NegativeSampler, negatives: int):
        self.w_in = w_in
        self.w_out = w_out
        self.sampler = sampler
        self.k = negatives
        self.labels = np.zeros(1 + negatives, dtype=np.float64)
        self.labels[0] = 1.0

    def run(self, kept: List[int], radii, alpha: float, rng) -> tuple:
        n = len(kept)
        centers, contexts = [], []
        for i in range(n):
            r = radii[i]
            lo = i - r if i > r else 0
            hi = i + r + 1
            if hi > n:
                hi = n
            for j in range(lo, hi):
                if j != i:
                    centers.append(kept[i])
                    contexts.append(kept[j])
        pairs = len(centers)
        if pairs == 0:
            return 0.0, 0
        centers = np.asarray(centers, dtype=np.int64)
        outs = np.empty((pairs, 1 + self.k), dtype=np.int64)
        outs[:, 0] = contexts
        outs[:, 1:] = self.sampler.sample(rng, (pairs, self.k))
        collide = outs[:, 1:] == outs[:, :1]  # negative drew the positive
        v_rows = self.w_in[centers]
        o_rows = self.w_out[outs]
        scores = np.einsum("pd,pkd->pk", v_rows, o_rows)
        gate = _sigmoid(scores)
        g = (alpha * (self.labels - gate)).astype(self.w_in.dtype)
        g[:, 1:][collide] = 0.0
        loss = float(_softplus(-scores[:, 0]).sum())
        neg_losses = _softplus(scores[:, 1:])
        neg_losses[collide] = 0.0
        loss += float(neg_losses.sum())
        dv = np.einsum("pk,pkd->pd", g, o_rows)
        do = g[:, :, None] * v_rows[:, None, :]
        _scatter_add(self.w_in, centers, dv)
        _scatter_add(self.w_out, outs.reshape(-1), do.reshape(-1, do.shape[2]))
        return loss, pairs


def _encode_corpus(corpus_path, vocab: Vocabulary) -> List[np.ndarray]:
    index = vocab.index
    sentences = []
    with open(corpus_path, "r", encoding="utf-8") as handle:
        for line in handle:
            ids = [index[t] for t in line.split() if t in index]
            if ids:
                sentences.append(np.asarray(ids, dtype=np.int64))
    return sentences


def _keep_probs(vocab: Vocabulary, t: float):
    if t <= 0:
        return None
    freq = vocab.counts / max(1, vocab.total)
    keep = np.sqrt(t / freq)
    return np.minimum(keep, 1.0)


_FINITE_CHECK_EVERY = 1_000_000


def train(corpus_path, hyperparams: Hyperparams, jobs: Optional[int] = None,
          progress: Optional[Callable[[int, float], None]] = None) -> EmbeddingModel:
    """Train a model on a corpus file of one sentence per line."""
    hp = hyperparams
    vocab = build_vocab(corpus_path, hp.min_count)
    v, dim = len(vocab), hp.dim
    rng = np.random.default_rng(hp.seed)
    w_in = ((rng.random((v, dim)) - 0.5) / dim).astype(np.float32)
    w_out = np.zeros((v, dim), dtype=np.float32)

    if hp.mode == "parallel" and (jobs or os.cpu_count() or 1) > 1:
        losses = _train_parallel(corpus_path, hp, vocab, w_in, w_out,
                                 jobs or os.cpu_count() or 1, progress)
        return EmbeddingModel(vocab, w_in, w_out, hp, losses)

    sentences = _encode_corpus(corpus_path, vocab)
    sampler = NegativeSampler(vocab)
    keep = _keep_probs(vocab, hp.subsample_t)
    kernel = _SentenceKernel(w_in, w_out, sampler, hp.negatives)
    schedule_total = hp.epochs * max(1, vocab.total)
    processed = 0
    updates = 0
    next_finite_check = _FINITE_CHECK_EVERY
    epoch_losses = []
    for epoch in range(hp.epochs):
        loss_sum = 0.0
        pair_count = 0
        for s_index, ids in enumerate(sentences):
            alpha = max(hp.min_lr, hp.initial_lr * (1.0 - processed / schedule_total))
            processed += len(ids)
            if keep is not None:
                kept = ids[rng.random(len(ids)) < keep[ids]]
            else:
                kept = ids
            if len(kept) < 2:
                continue
            if hp.dynamic_window:
                radii = rng.integers(1, hp.window + 1, size=len(kept))
            else:
                radii = np.full(len(kept), hp.window)
            loss, pairs = kernel.run(kept.tolist(), radii.tolist(), alpha, rng)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss diverged at epoch {epoch + 1}, sentence {s_index}, lr {alpha:.6g}"
                )
            loss_sum += loss
            pair_count += pairs
            updates += pairs
            if updates >= next_finite_check:
                next_finite_check += _FINITE_CHECK_EVERY
                if not (np.isfinite(w_in).all() and np.isfinite(w_out).all()):
                    raise NonFiniteLoss(f"matrices non-finite after {updates} updates")
        mean_loss = loss_sum / max(1, pair_count)
        epoch_losses.append(mean_loss)
        if progress is not None:
            progress(epoch + 1, mean_loss)
    return EmbeddingModel(vocab, w_in, w_out, hp, epoch_losses)


# -- lock-free parallel training -----------------------------------------

_HOG = {}


def _hog_init(buf_in, buf_out, shape, corpus_path, hp, vocab_tokens, vocab_counts, jobs):
    vocab = Vocabulary.from_items(vocab_tokens, vocab_counts)
    _HOG["w_in"] = np.frombuffer(buf_in, dtype=np.float32).reshape(shape)
    _HOG["w_out"] = np.frombuffer(buf_out, dtype=np.float32).reshape(shape)
    _HOG["vocab"] = vocab
    _HOG["hp"] = hp
    _HOG["jobs"] = jobs
    _HOG["keep"] = _keep_probs(vocab, hp.subsample_t)
    _HOG["sampler"] = NegativeSampler(vocab)
    index = vocab.index
    shardset = [[] for _ in range(jobs)]
    with open(corpus_path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle):
            ids = [index[t] for t in line.split() if t in index]
            if ids:
                shardset[lineno % jobs].append(np.asarray(ids, dtype=np.int64))
    _HOG["shards"] = shardset


def _hog_epoch(args):
    epoch, wid = args
    hp: Hyperparams = _HOG["hp"]
    vocab: Vocabulary = _HOG["vocab"]
    shard = _HOG["shards"][wid]
    rng = np.random.default_rng((hp.seed, wid, epoch))
    kernel = _SentenceKernel(_HOG["w_in"], _HOG["w_out"], _HOG["sampler"], hp.negatives)
    keep = _HOG["keep"]
    share = max(1, vocab.total // _HOG["jobs"])
    schedule_total = hp.epochs * share
    processed = epoch * share
    loss_sum, pair_count = 0.0, 0
    for ids in shard:
        alpha = max(hp.min_lr, hp.initial_lr * (1.0 - processed / schedule_total))
        processed += len(ids)
        if keep is not None:
            kept = ids[rng.random(len(ids)) < keep[ids]]
        else:
            kept = ids
        if len(kept) < 2:
            continue
        if hp.dynamic_window:
            radii = rng.integers(1, hp.window + 1, size=len(kept))
        else:
            radii = np.full(len(kept), hp.window)
        loss, pairs = kernel.run(kept.tolist(), radii.tolist(), alpha, rng)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"loss diverged in worker {wid}, epoch {epoch + 1}")
        loss_sum += loss
        pair_count += pairs
    return loss_sum, pair_count


def _train_parallel(corpus_path, hp, vocab, w_in, w_out, jobs, progress):
    shape = w_in.shape
    buf_in = RawArray("f", w_in.size)
    buf_out = RawArray("f", w_out.size)
    shared_in = np.frombuffer(buf_in, dtype=np.float32).reshape(shape)
    shared_out = np.frombuffer(buf_out, dtype=np.float32).reshape(shape)
    shared_in[:] = w_in
    shared_out[:] = w_out
    losses = []
    with Pool(jobs, initializer=_hog_init,
              initargs=(buf_in, buf_out, shape, corpus_path, hp,
                        vocab.tokens, vocab.counts.tolist(), jobs)) as pool:
        for epoch in range(hp.epochs):
            results = pool.map(_hog_epoch, [(epoch, wid) for wid in range(jobs)])
            loss_sum = sum(r[0] for r in results)
            pair_count = sum(r[1] for r in results)
            mean_loss = loss_sum / max(1, pair_count)
            losses.append(mean_loss)
            if progress is not None:
                progress(epoch + 1, mean_loss)
    w_in[:] = shared_in
    w_out[:] = shared_out
    return losses


# -- model files -----------------------------------------------------------


def _format_float(x) -> str:
    return repr(float(x))


def save_model(model: EmbeddingModel, path) -> None:
    """Text format: header "V dim", V token+vector lines, then a "#"
    trailer with hyperparams as key=value plus counts and output
    sections for a lossless round trip."""
    vocab = model.vocab
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(f"{len(vocab)} {model.input.shape[1]}\n")
        for i, token in enumerate(vocab.tokens):
            row = " ".join(_format_float(x) for x in model.input[i])
            out.write(f"{token} {row}\n")
        out.write("#\n")
        for field in fields(Hyperparams):
            out.write(f"{field.name}={getattr(model.hyperparams, field.name)}\n")
        out.write("#counts\n")
        for count in vocab.counts:
            out.write(f"{int(count)}\n")
        out.write("#output\n")
        for i in range(len(vocab)):
            out.write(" ".join(_format_float(x) for x in model.output[i]) + "\n")


def _parse_hyper_value(name: str, text: str):
    for field in fields(Hyperparams):
        if field.name == name:
            if field.type == "bool" or isinstance(field.default, bool):
                return text == "True"
            if isinstance(field.default, int):
                return int(text)
            if isinstance(field.default, float):
                return float(text)
            return text
    return None


def load_model(path) -> EmbeddingModel:
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise FormatError("empty model file", line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError("header must be 'V dim'", line=1)
    try:
        v, dim = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError("header must be 'V dim'", line=1) from None
    if v < 1 or dim < 1:
        raise FormatError("header counts must be positive", line=1)
    if len(lines) < 1 + v:
        raise FormatError(f"expected {v} vector lines", line=len(lines))
    tokens: List[str] = []
    matrix = np.empty((v, dim), dtype=np.float32)
    for i in range(v):
        parts = lines[1 + i].split()
        if len(parts) != 1 + dim:
            raise FormatError(f"expected token plus {dim} floats", line=2 + i)
        tokens.append(parts[0])
        try:
            matrix[i] = [float(x) for x in parts[1:]]
        except ValueError:
            raise FormatError("bad float", line=2 + i) from None
    if len(set(tokens)) != v:
        raise FormatError("duplicate token in vocabulary", line=1 + v)
    counts = [1] * v
    output = np.zeros((v, dim), dtype=np.float32)
    hyper = {}
    pos = 1 + v
    section = None
    row = 0
    while pos < len(lines):
        line = lines[pos]
        if line == "#":
            section = "params"
        elif line == "#counts":
            section, row = "counts", 0
        elif line == "#output":
            section, row = "output", 0
        elif section == "params" and line:
            name, _, value = line.partition("=")
            parsed = _parse_hyper_value(name, value)
            if parsed is not None:
                hyper[name] = parsed
        elif section == "counts" and line:
            if row >= v:
                raise FormatError("more counts than tokens", line=pos + 1)
            counts[row] = int(line)
            row += 1
        elif section == "output" and line:
            if row >= v:
                raise FormatError("more output rows than tokens", line=pos + 1)
            parts = line.split()
            if len(parts) != dim:
                raise FormatError(f"expected {dim} floats", line=pos + 1)
            output[row] = [float(x) for x in parts]
            row += 1
        pos += 1
    defaults = Hyperparams()
    if "dim" in hyper and hyper["dim"] != dim:
        raise FormatError("hyperparameter dim disagrees with header", line=1)
    hyper["dim"] = dim
    hp = replace(defaults, **hyper)
    vocab = Vocabulary.from_items(tokens, counts)
    return EmbeddingModel(vocab, matrix, output, hp)
