"""Exact tSNE projection of embedding vectors to 2D, with SVG output.

The implementation is the classic O(V^2) algorithm: per-point Gaussian
bandwidths fit by binary search to a target perplexity, symmetrized
affinities, Student-t low-dimensional kernel, gradient descent with
momentum and an early-exaggeration phase.  Memory is O(V^2); fine for
vocabularies up to a few thousand tokens.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional, Tuple
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .embedder import EmbeddingModel
from .errors import MalformedToken, NonFiniteGradient, PerplexityTooLarge
from .tokens import parse_token

INITS = ("random_gaussian", "pca")


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_duration: int = 250
    learning_rate: Optional[float] = None  # None -> max(V / 12, 50)
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    seed: int = 1
    init: str = "random_gaussian"

    def __post_init__(self):
        if self.perplexity <= 0:
            raise ValueError("perplexity must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}")


@dataclass
class Projection:
    tokens: List[str]
    coords: np.ndarray  # (V, 2)
    pieces: List[str]   # piece kind letter, "" when the token has none
    colors: List[str]   # "white" | "black" | ""
    kl_trace: List[float]
    label_visible: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.label_visible is None:
            self.label_visible = np.zeros(len(self.tokens), dtype=bool)


_ENTROPY_TOL = 1e-5
_MAX_BISECTIONS = 50


def _conditional_affinities(sq_dists: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-stochastic P with each row's entropy matched to
    log(perplexity) by bisecting the Gaussian precision."""
    v = sq_dists.shape[0]
    target = np.log(perplexity)
    p = np.zeros((v, v))
    for i in range(v):
        row = sq_dists[i]
        beta, lo, hi = 1.0, -np.inf, np.inf
        for _ in range(_MAX_BISECTIONS):
            ex = np.exp(-row * beta)
            ex[i] = 0.0
            total = ex.sum()
            entropy = np.log(total) + beta * (row @ ex) / total
            diff = entropy - target
            if abs(diff) < _ENTROPY_TOL:
                break
            if diff > 0:
                lo = beta
                beta = beta * 2.0 if np.isinf(hi) else (beta + hi) / 2.0
            else:
                hi = beta
                beta = beta / 2.0 if np.isinf(lo) else (beta + lo) / 2.0
        p[i] = ex / total
    return p


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", x, x)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _pca_init(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2]
    for c in range(2):
        j = np.argmax(np.abs(comps[c]))
        if comps[c, j] < 0:
            comps[c] = -comps[c]
    scores = centered @ comps.T
    spread = scores[:, 0].std()
    if spread > 0:
        scores = scores * (1e-4 / spread)
    return scores


def tsne(model: EmbeddingModel, config: TsneConfig = TsneConfig()) -> Projection:
    """Project the model's input vectors to 2D.  Returns coordinates
    plus the per-iteration KL divergence against the true (never
    exaggerated) affinities."""
    x = model.input.astype(np.float64)
    v = x.shape[0]
    if v < 4:
        raise ValueError(f"need at least 4 vectors, got {v}")
    if 3.0 * config.perplexity > v - 1:
        raise PerplexityTooLarge(
            f"perplexity {config.perplexity} needs more than {v} points "
            f"(require 3 * perplexity <= V - 1)"
        )
    cond = _conditional_affinities(_pairwise_sq_dists(x), config.perplexity)
    p = (cond + cond.T) / (2.0 * v)
    p = np.maximum(p, 1e-12)
    p_log_p = float((p * np.log(p)).sum())

    rng = np.random.default_rng(config.seed)
    if config.init == "pca":
        y = _pca_init(x)
    else:
        y = rng.normal(scale=1e-4, size=(v, 2))
    y = y - y.mean(axis=0)
    lr = config.learning_rate if config.learning_rate is not None else max(v / 12.0, 50.0)
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)  # adaptive per-coordinate step scaling
    duration = config.early_exaggeration_duration
    trace: List[float] = []
    for it in range(config.iterations):
        exaggerate = it < duration
        p_eff = p * config.early_exaggeration_factor if exaggerate else p
        d = _pairwise_sq_dists(y)
        num = 1.0 / (1.0 + d)
        np.fill_diagonal(num, 0.0)
        z = num.sum()
        # KL(P || Q) with Q = num / z and log(num) = -log1p(d)
        kl = p_log_p + float((p * np.log1p(d)).sum()) + np.log(z)
        trace.append(kl)
        q = num / z
        np.maximum(q, 1e-12, out=q)
        mult = (p_eff - q) * num
        grad = 4.0 * (mult.sum(axis=1)[:, None] * y - mult @ y)
        if not np.isfinite(grad).all():
            raise NonFiniteGradient(f"gradient diverged at iteration {it}")
        momentum = config.momentum_start if exaggerate else config.momentum_final
        same_dir = (grad > 0) == (velocity > 0)
        gains = np.where(same_dir, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - lr * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    pieces, colors = [], []
    for token in model.vocab.tokens:
        try:
            parsed = parse_token(token)
            pieces.append(parsed.piece.kind)
            colors.append(parsed.piece.color)
        except MalformedToken:
            pieces.append("")
            colors.append("")
    return Projection(list(model.vocab.tokens), y, pieces, colors, trace)


PALETTE = {
    "P": "#1f77b4",
    "N": "#2ca02c",
    "B": "#9467bd",
    "R": "#ff7f0e",
    "Q": "#d62728",
    "K": "#8c564b",
}
_NEUTRAL = "#7f7f7f"

_WIDTH = 1000.0
_HEIGHT = 1000.0
_MARGIN = 50.0


def _scaled(coords: np.ndarray) -> np.ndarray:
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    unit = (coords - lo) / span
    out = np.empty_like(unit)
    out[:, 0] = _MARGIN + unit[:, 0] * (_WIDTH - 2 * _MARGIN)
    out[:, 1] = _MARGIN + (1.0 - unit[:, 1]) * (_HEIGHT - 2 * _MARGIN)
    return out


def render(projection: Projection, label_every: int = 3, point_size: float = 4.0,
           palette: Optional[dict] = None) -> Tuple[str, str]:
    """SVG scatter plus a CSV table.  Fill color encodes piece kind,
    marker shape encodes color (circle White, triangle Black), and
    every label_every-th token in vocabulary order is labeled."""
    if not projection.tokens:
        raise ValueError("projection is empty")
    colors = dict(PALETTE)
    if palette:
        colors.update(palette)
    n = len(projection.tokens)
    labeled = np.array([i % label_every == 0 for i in range(n)]) if label_every > 0 \
        else np.zeros(n, dtype=bool)
    projection.label_visible = labeled
    pts = _scaled(projection.coords)
    s = point_size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_WIDTH:g}" height="{_HEIGHT:g}" '
        f'viewBox="0 0 {_WIDTH:g} {_HEIGHT:g}">',
        f'<rect width="{_WIDTH:g}" height="{_HEIGHT:g}" fill="white"/>',
    ]
    for i, token in enumerate(projection.tokens):
        cx, cy = pts[i]
        fill = colors.get(projection.pieces[i], _NEUTRAL)
        ident = quoteattr(token)
        if projection.colors[i] == "black":
            height = s * 0.866
            points = (f"{cx:.2f},{cy - s:.2f} {cx - height:.2f},{cy + s / 2:.2f} "
                      f"{cx + height:.2f},{cy + s / 2:.2f}")
            parts.append(f'<polygon points="{points}" fill="{fill}" data-token={ident}/>')
        else:
            parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{s:.2f}" '
                         f'fill="{fill}" data-token={ident}/>')
        if labeled[i]:
            parts.append(
                f'<text x="{cx + s + 1:.2f}" y="{cy + 2:.2f}" '
                f'font-size="8" font-family="monospace">{escape(token)}</text>'
            )
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"
    table = io.StringIO()
    writer = csv.writer(table, lineterminator="\n")
    writer.writerow(["token", "x", "y", "piece", "color", "labeled"])
    for i, token in enumerate(projection.tokens):
        writer.writerow([
            token,
            repr(float(projection.coords[i, 0])),
            repr(float(projection.coords[i, 1])),
            projection.pieces[i],
            projection.colors[i],
            "true" if labeled[i] else "false",
        ])
    return svg, table.getvalue()
