"""Similarity queries checked against brute-force re-computations."""

import numpy as np
import pytest

from chessvec.embedder import EmbeddingModel, Hyperparams, Vocabulary
from chessvec.errors import NonMoveVocabulary, TooFewTokens, UnknownToken
from chessvec.queries import (analogy, cosine, destination_stats,
                              extreme_pairs, most_similar, odd_one_out)


def model_of(tokens, vectors, counts=None):
    vocab = Vocabulary.from_items(tokens, counts or [1] * len(tokens))
    mat = np.asarray(vectors, dtype=np.float32)
    return EmbeddingModel(vocab, mat, np.zeros_like(mat),
                          Hyperparams(dim=mat.shape[1], min_count=1))


def test_cosine_and_most_similar_basics():
    model = model_of(["a", "b", "c"], [[1, 0], [0, 1], [1, 0]])
    assert cosine(model, "a", "a") == pytest.approx(1.0, abs=1e-6)
    assert cosine(model, "a", "b") == pytest.approx(0.0, abs=1e-12)
    assert most_similar(model, "a", 1)[0].token == "c"
    # k beyond V-1 clamps, and the query token itself never appears
    names = [n.token for n in most_similar(model, "a", 99)]
    assert names == ["c", "b"]
    with pytest.raises(UnknownToken):
        most_similar(model, "zz", 3)


def test_equal_similarities_order_lexicographically():
    model = model_of(["a", "c", "b"], [[1, 0], [0, 1], [0, 1]])
    assert [n.token for n in most_similar(model, "a", 2)] == ["b", "c"]


def test_most_similar_matches_brute_force():
    rng = np.random.default_rng(8)
    tokens = [f"t{i:02d}" for i in range(30)]
    model = model_of(tokens, rng.normal(size=(30, 12)))
    norm = model.normalized()
    for probe in ("t00", "t17", "t29"):
        i = model.vocab.index[probe]
        sims = norm @ norm[i]
        expect = sorted(
            ((float(s), t) for t, s in zip(tokens, sims) if t != probe),
            key=lambda p: (-p[0], p[1]))[:7]
        got = most_similar(model, probe, 7)
        assert [n.token for n in got] == [t for _, t in expect]
        assert [n.similarity for n in got] == pytest.approx(
            [s for s, _ in expect], abs=1e-7)


def test_analogy_recovers_exact_offset():
    rng = np.random.default_rng(5)
    va, vb, vc = (v / np.linalg.norm(v) for v in rng.normal(size=(3, 6)))
    vd = va - vb + vc
    model = model_of(["a", "b", "c", "d", "x", "y", "z"],
                     np.vstack([va, vb, vc, vd, rng.normal(size=(3, 6))]))
    result = analogy(model, positive=["a", "c"], negative=["b"], k=2)
    assert result[0].token == "d"
    # inputs are excluded from the ranking
    assert {"a", "b", "c"}.isdisjoint({n.token for n in result})


def test_single_positive_analogy_equals_most_similar():
    rng = np.random.default_rng(6)
    model = model_of(list("abcdefg"), rng.normal(size=(7, 5)))
    via_analogy = analogy(model, ["a"], [], 4)
    direct = most_similar(model, "a", 4)
    assert [n.token for n in via_analogy] == [n.token for n in direct]
    assert [n.similarity for n in via_analogy] == pytest.approx(
        [n.similarity for n in direct], abs=1e-12)


def test_odd_one_out_and_errors():
    model = model_of(["a", "ap", "b"], [[1, 0], [1, 0], [0, 1]])
    assert odd_one_out(model, ["a", "ap", "b"]) == "b"
    with pytest.raises(TooFewTokens):
        odd_one_out(model, ["a", "b"])
    with pytest.raises(UnknownToken):
        odd_one_out(model, ["a", "b", "nope"])


def test_odd_one_out_tie_prefers_lexicographic():
    model = model_of(["p", "q", "r"], [[1, 0], [0, 1], [1, 1]])
    # p and q are symmetric around r, so the tie resolves to "p"
    assert odd_one_out(model, ["p", "q", "r"]) == "p"


def test_extreme_pairs_match_exhaustive_enumeration():
    rng = np.random.default_rng(5)
    tokens = [f"t{i:02d}" for i in range(40)]
    model = model_of(tokens, rng.normal(size=(40, 8)),
                     counts=[i + 1 for i in range(40)])
    top, bottom = extreme_pairs(model, k=5, min_count=0)
    norm = model.normalized()
    every = [(float(norm[i] @ norm[j]), tokens[i], tokens[j])
             for i in range(40) for j in range(i + 1, 40)]
    best = sorted(every, key=lambda p: (-p[0], p[1], p[2]))[:5]
    worst = sorted(every, key=lambda p: (p[0], p[1], p[2]))[:5]
    assert [(p.a, p.b) for p in top] == [(a, b) for _, a, b in best]
    assert [(p.a, p.b) for p in bottom] == [(a, b) for _, a, b in worst]
    assert [p.similarity for p in top] == pytest.approx(
        [s for s, _, _ in best], abs=1e-7)


def test_extreme_pairs_min_count_filter():
    rng = np.random.default_rng(5)
    tokens = [f"t{i:02d}" for i in range(40)]
    model = model_of(tokens, rng.normal(size=(40, 8)),
                     counts=[i + 1 for i in range(40)])
    top, bottom = extreme_pairs(model, k=5, min_count=21)
    for pair in top + bottom:
        assert int(pair.a[1:]) >= 20 and int(pair.b[1:]) >= 20


def test_extreme_pairs_tiny_vocabulary():
    model = model_of(["a", "b"], [[1, 0], [1, 0]])
    top, bottom = extreme_pairs(model, k=3)
    assert top == bottom
    assert len(top) == 1
    assert (top[0].a, top[0].b) == ("a", "b")
    assert top[0].similarity == pytest.approx(1.0, abs=1e-9)


def _dest_model():
    rng = np.random.default_rng(5)
    tokens = ["Ng3f5", "Ne3f5", "Nh4f5", "Nd4f5",  # same piece and landing
              "ng6f5",                              # black knight, same square
              "Bg3f5",                              # different piece kind
              "Ng3f6",                              # different landing square
              "Pe2e4", "Pd2d4", "Pc2c4", "Ph2h4", "Pa2a3"]
    center = rng.normal(size=16)
    vecs = np.zeros((12, 16))
    vecs[0] = center
    for i in range(1, 12):
        vecs[i] = center * (0.9 - 0.05 * i) + rng.normal(size=16) * 0.1
    return model_of(tokens, vecs)


def test_destination_stats_counts_are_monotonic():
    rows = destination_stats(_dest_model(), thresholds=(1, 2, 3, 4))
    assert [r.n for r in rows] == [1, 2, 3, 4]
    for prev, cur in zip(rows, rows[1:]):
        assert prev.count >= cur.count
    for row in rows:
        assert 0.0 <= row.percent <= 100.0


def test_destination_stats_qualifying_rule():
    """Only same kind, same color, same landing square, other origin counts."""
    tokens = ["Qd1h5", "Qa1h5", "Qb2h5",  # three white queens into h5
              "qd8h5",                     # black queen into h5
              "Bd1h5"]                     # bishop into h5
    # put every vector near the first so all are top-10 neighbors
    rng = np.random.default_rng(2)
    center = rng.normal(size=8)
    vecs = [center + rng.normal(size=8) * 0.01 for _ in tokens]
    model = model_of(tokens, vecs)
    rows = destination_stats(model, thresholds=(1, 2, 3))
    by_n = {r.n: r.count for r in rows}
    # each white queen move sees the other two as qualifying, black queen
    # and bishop see nobody
    assert by_n[1] == 3 and by_n[2] == 3 and by_n[3] == 0


def test_destination_stats_scale_invariance():
    model = _dest_model()
    rows = destination_stats(model, thresholds=(1, 2, 3, 4))
    scaled = model_of(model.vocab.tokens, model.input * 7.0)
    assert destination_stats(scaled, thresholds=(1, 2, 3, 4)) == rows


def test_destination_stats_requires_move_majority():
    model = model_of(["Pe2", "pa7", "Ke1", "Pe2e4"], np.eye(4))
    with pytest.raises(NonMoveVocabulary):
        destination_stats(model)


def test_neighbors_cover_vocabulary_exactly_once():
    rng = np.random.default_rng(5)
    tokens = [f"t{i:02d}" for i in range(40)]
    model = model_of(tokens, rng.normal(size=(40, 8)))
    names = [n.token for n in most_similar(model, "t00", 39)]
    assert sorted(names) == tokens[1:]
