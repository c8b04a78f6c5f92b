"""Exact 2D projection: pairing, perplexity calibration, KL descent, SVG."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from chessvec.embedder import EmbeddingModel, Hyperparams, Vocabulary
from chessvec.errors import PerplexityTooLarge
from chessvec.projector import (TsneConfig, _conditional_affinities,
                                _pairwise_sq_dists, render, tsne)

SVG_NS = "{http://www.w3.org/2000/svg}"


def model_of(tokens, vectors):
    vocab = Vocabulary.from_items(tokens, [1] * len(tokens))
    mat = np.asarray(vectors, dtype=np.float32)
    return EmbeddingModel(vocab, mat, np.zeros_like(mat),
                          Hyperparams(dim=mat.shape[1], min_count=1))


def _pair_model():
    vecs = np.array([[10, 0, 0], [10, 0, 0.001], [0, 10, 0], [0, 10, 0.001]])
    return model_of(["a1", "a2", "b1", "b2"], vecs)


def test_identical_pairs_land_together():
    proj = tsne(_pair_model(), TsneConfig(perplexity=1.0, iterations=500,
                                          seed=3, learning_rate=1.0))
    y = proj.coords
    def gap(i, j):
        return float(np.linalg.norm(y[i] - y[j]))
    assert gap(0, 1) < min(gap(0, 2), gap(0, 3))
    assert gap(2, 3) < min(gap(2, 0), gap(2, 1))


def test_same_seed_reproduces_coordinates():
    config = TsneConfig(perplexity=1.0, iterations=80, seed=3,
                        learning_rate=1.0)
    one = tsne(_pair_model(), config)
    two = tsne(_pair_model(), config)
    assert np.array_equal(one.coords, two.coords)
    assert one.kl_trace == two.kl_trace
    other = tsne(_pair_model(), TsneConfig(perplexity=1.0, iterations=80,
                                           seed=4, learning_rate=1.0))
    assert not np.array_equal(one.coords, other.coords)


def test_final_layout_is_mean_centered():
    proj = tsne(_pair_model(), TsneConfig(perplexity=1.0, iterations=120,
                                          seed=3, learning_rate=1.0))
    assert np.abs(proj.coords.mean(axis=0)).max() < 1e-9


def test_kl_trace_descends_after_exaggeration():
    proj = tsne(_pair_model(), TsneConfig(perplexity=1.0, iterations=500,
                                          seed=3, learning_rate=1.0))
    trace = proj.kl_trace
    assert len(trace) == 500
    assert all(np.isfinite(t) for t in trace)
    # once exaggeration lifts at iteration 250 the true KL keeps dropping
    assert trace[-1] < trace[250]


def test_perplexity_guard():
    model = _pair_model()
    with pytest.raises(PerplexityTooLarge):
        tsne(model, TsneConfig(perplexity=2.0))
    # 3 * perplexity == V - 1 sits exactly on the boundary and is allowed
    tsne(model, TsneConfig(perplexity=1.0, iterations=5, learning_rate=1.0))


def test_tiny_vocabulary_rejected():
    model = model_of(["a", "b", "c"], np.eye(3))
    with pytest.raises(ValueError):
        tsne(model, TsneConfig(perplexity=0.5, iterations=5))


def test_bisection_hits_target_perplexity():
    rng = np.random.default_rng(0)
    cloud = rng.normal(size=(200, 16))
    cond = _conditional_affinities(_pairwise_sq_dists(cloud), 30.0)
    logp = np.log(np.where(cond > 0, cond, 1.0))
    realized = np.exp(-(cond * logp).sum(axis=1))
    assert np.abs(realized - 30.0).max() < 1e-3
    assert np.abs(cond.sum(axis=1) - 1.0).max() < 1e-9
    assert np.abs(np.diag(cond)).max() == 0.0


def test_joint_affinities_symmetric_and_normalized():
    rng = np.random.default_rng(1)
    cloud = rng.normal(size=(50, 8))
    cond = _conditional_affinities(_pairwise_sq_dists(cloud), 10.0)
    joint = (cond + cond.T) / (2 * 50)
    assert abs(joint.sum() - 1.0) < 1e-9
    assert np.abs(joint - joint.T).max() < 1e-15


def test_pca_init_ignores_seed():
    rng = np.random.default_rng(0)
    model = model_of([f"t{i}" for i in range(60)], rng.normal(size=(60, 10)))
    one = tsne(model, TsneConfig(perplexity=10, iterations=20, init="pca", seed=1))
    two = tsne(model, TsneConfig(perplexity=10, iterations=20, init="pca", seed=2))
    assert np.array_equal(one.coords, two.coords)


def test_pca_init_pairs_points_at_default_rate():
    proj = tsne(_pair_model(), TsneConfig(perplexity=1.0, iterations=400,
                                          seed=1, init="pca"))
    y = proj.coords
    assert np.linalg.norm(y[0] - y[1]) < np.linalg.norm(y[0] - y[2])


def _rendered():
    rng = np.random.default_rng(0)
    tokens = ["Pe2e4", "pe7e5", "Ng1f3", "nb8c6", "Bf1c4", "qd8h4", "Ke1g1",
              "Re1e8", "Pd2", "x!"]
    model = model_of(tokens, rng.normal(size=(10, 4)))
    proj = tsne(model, TsneConfig(perplexity=2, iterations=50, seed=4))
    svg, csv_text = render(proj, label_every=3)
    return proj, svg, csv_text


def test_svg_is_well_formed_with_correct_markers():
    proj, svg, _ = _rendered()
    root = ET.fromstring(svg)
    assert root.tag == SVG_NS + "svg"
    circles = root.findall(f".//{SVG_NS}circle")
    triangles = root.findall(f".//{SVG_NS}polygon")
    black_count = sum(1 for c in proj.colors if c == "black")
    assert len(triangles) == black_count
    assert len(circles) == len(proj.tokens) - black_count
    texts = root.findall(f".//{SVG_NS}text")
    assert len(texts) == 4  # indices 0, 3, 6, 9


def test_svg_groups_piece_kinds_by_fill():
    rng = np.random.default_rng(0)
    tokens = ["Ng1f3", "Nb1c3", "ng8f6", "Qd1h5", "qd8h4", "Pe2"]
    model = model_of(tokens, rng.normal(size=(6, 4)))
    proj = tsne(model, TsneConfig(perplexity=1, iterations=30, seed=1))
    svg, _ = render(proj, label_every=1)
    root = ET.fromstring(svg)
    fill = {}
    for el in root.iter():
        if el.tag in (SVG_NS + "circle", SVG_NS + "polygon"):
            fill[el.get("data-token")] = el.get("fill")
    assert fill["Ng1f3"] == fill["Nb1c3"] == fill["ng8f6"]
    assert fill["Qd1h5"] == fill["qd8h4"]
    assert fill["Ng1f3"] != fill["Qd1h5"]


def test_csv_lists_every_point():
    proj, _, csv_text = _rendered()
    lines = csv_text.strip().split("\n")
    assert lines[0] == "token,x,y,piece,color,labeled"
    assert len(lines) == 1 + len(proj.tokens)
    labeled = [line.endswith(",true") for line in lines[1:]]
    assert labeled == [i % 3 == 0 for i in range(len(proj.tokens))]
    assert labeled == proj.label_visible.tolist()
    for line, x, y in zip(lines[1:], proj.coords[:, 0], proj.coords[:, 1]):
        fields = line.split(",")
        assert float(fields[1]) == x and float(fields[2]) == y


def test_unparseable_tokens_render_neutral():
    proj, svg, csv_text = _rendered()
    row = [l for l in csv_text.splitlines() if l.startswith("x!,")][0]
    assert ",,," in row or row.split(",")[3] == ""
    root = ET.fromstring(svg)
    marker = [el for el in root.iter()
              if el.get("data-token") == "x!"][0]
    assert marker.tag == SVG_NS + "circle"
