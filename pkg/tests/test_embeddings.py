import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clbt.alignment import PairRecord
from clbt.embeddings import (
    EmbeddingMatrix,
    PairedEmbeddings,
    apply_transform,
    assemble_pairs,
    reduce_to_words,
    unit_normalize,
)
from clbt.errors import DimensionError, EmptyTrainingSet, FormatError, MissingEmbedding
from clbt.evaluation import SynthSpec, generate_synthetic
from clbt.fit import TransformMatrix, fit_procrustes
from clbt.linalg import random_orthogonal


def emb(keys, rows):
    return EmbeddingMatrix(keys, np.asarray(rows, dtype=float))


def test_embedding_matrix_validation():
    with pytest.raises(FormatError):
        emb(["a:0", "a:0"], [[1.0], [2.0]])
    with pytest.raises(FormatError):
        emb(["a:0"], [[np.nan]])
    with pytest.raises(FormatError):
        emb(["a:0", "a:1"], [[1.0]])


def test_paired_embeddings_validation():
    with pytest.raises(DimensionError):
        PairedEmbeddings(np.ones((2, 3)), np.ones((3, 3)))
    with pytest.raises(EmptyTrainingSet):
        PairedEmbeddings(np.ones((0, 3)), np.ones((0, 3)))


TARGET = emb(["0:0", "0:1", "0:2", "1:0"], np.arange(12.0).reshape(4, 3))
SOURCE = emb(["0:0", "0:1", "1:0", "1:1"], -np.arange(12.0).reshape(4, 3))


def test_assemble_in_pair_order():
    recs = [PairRecord(1, 0, 1, 0, 1), PairRecord(0, 1, 0, 2, 0)]
    p = assemble_pairs(recs, TARGET, SOURCE)
    assert p.n == 2 and p.skipped == 0
    np.testing.assert_array_equal(p.x, [TARGET.row("1:0"), TARGET.row("0:2")])
    np.testing.assert_array_equal(p.y, [SOURCE.row("1:1"), SOURCE.row("0:0")])
    assert p.provenance == tuple(recs)


def test_assemble_lenient_skips_missing():
    recs = [PairRecord(0, 0, 0, 0, 0), PairRecord(0, 1, 1, 9, 1), PairRecord(1, 0, 0, 0, 0)]
    p = assemble_pairs(recs, TARGET, SOURCE)
    assert p.n == 2 and p.skipped == 1
    assert p.provenance == (recs[0], recs[2])


def test_assemble_strict_fails():
    recs = [PairRecord(0, 0, 0, 0, 5)]
    with pytest.raises(MissingEmbedding, match="source"):
        assemble_pairs(recs, TARGET, SOURCE, strict=True)


def test_assemble_empty():
    with pytest.raises(EmptyTrainingSet):
        assemble_pairs([PairRecord(5, 0, 0, 0, 0)], TARGET, SOURCE)


def test_assemble_uses_first_piece():
    # word spanning pieces 3, 4, 5 contributes the row keyed "s:3"
    keys = [f"2:{i}" for i in range(6)]
    target = emb(keys, np.eye(6))
    source = emb(["2:0"], [[1.0] * 6])
    p = assemble_pairs([PairRecord(2, 1, 0, 3, 0)], target, source)
    np.testing.assert_array_equal(p.x[0], np.eye(6)[3])


def test_apply_identity_exact():
    out = apply_transform(TransformMatrix(np.eye(3), "svd", True, 0.0, 1), TARGET)
    assert out.keys == TARGET.keys
    np.testing.assert_array_equal(out.vectors, TARGET.vectors)


def test_apply_rectangular_and_mismatch():
    w = TransformMatrix(np.ones((2, 3)), "gd", False, 0.0, 1)
    assert apply_transform(w, TARGET).dim == 2
    with pytest.raises(DimensionError):
        apply_transform(TransformMatrix(np.ones((3, 2)), "gd", False, 0.0, 1), TARGET)


def test_apply_orthogonal_preserves_norms():
    rng = np.random.default_rng(1)
    e = emb([f"0:{i}" for i in range(200)], rng.standard_normal((200, 16)))
    out = apply_transform(TransformMatrix(random_orthogonal(16, 3), "svd", True, 0.0, 1), e)
    np.testing.assert_allclose(np.linalg.norm(out.vectors, axis=1), np.linalg.norm(e.vectors, axis=1), rtol=1e-6)


@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_apply_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    w = TransformMatrix(rng.standard_normal((5, 4)), "gd", False, 0.0, 1)
    u, v = rng.standard_normal((2, 4))
    combo = apply_transform(w, emb(["0:0"], [a * u + b * v])).vectors[0]
    parts = apply_transform(w, emb(["0:0", "0:1"], [u, v])).vectors
    expected = a * parts[0] + b * parts[1]
    assert np.linalg.norm(combo - expected) <= 1e-10 * max(np.linalg.norm(expected), 1.0)


@given(seed=st.integers(0, 2**32 - 1))
def test_orthogonal_preserves_cosines(seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 12))
    out = apply_transform(TransformMatrix(random_orthogonal(12, seed), "svd", True, 0.0, 1), emb(["0:0", "0:1"], [u, v]))
    wu, wv = out.vectors

    def cos(p, q):
        return p @ q / np.linalg.norm(p) / np.linalg.norm(q)

    assert abs(cos(wu, wv) - cos(u, v)) <= 1e-8


def test_apply_planted_fit_reaches_noise_floor():
    train, test, r = generate_synthetic(SynthSpec(n=3000, d=32, noise_sigma=0.01, seed=4, n_test=500))
    w = fit_procrustes(train)
    mapped = apply_transform(w, emb([f"{i}:0" for i in range(test.n)], test.x)).vectors
    noise_floor = np.mean(np.linalg.norm(test.y - test.x @ r.T, axis=1))
    fitted = np.mean(np.linalg.norm(test.y - mapped, axis=1))
    # estimation error adds at most a few percent at this n/d
    assert fitted <= 1.02 * noise_floor


PIECES = emb(["0:0", "0:1", "0:2", "0:3", "0:4", "0:5", "1:0"], np.arange(7.0)[:, None] * [1.0, 10.0])
SPANS = {0: [(0, 1), (1, 2), (3, 3)], 1: [(0, 1)]}


def test_reduce_leftmost():
    out = reduce_to_words(PIECES, SPANS)
    assert out.keys == ("0:0", "0:1", "0:2", "1:0")
    np.testing.assert_array_equal(out.row("0:2"), PIECES.row("0:3"))
    np.testing.assert_array_equal(out.row("0:1"), PIECES.row("0:1"))


def test_reduce_single_piece_words_is_rekeyed_copy():
    e = emb(["3:0", "3:1"], [[1.0, 2.0], [3.0, 4.0]])
    out = reduce_to_words(e, {3: [(0, 1), (1, 1)]})
    assert out.keys == e.keys
    np.testing.assert_array_equal(out.vectors, e.vectors)


@pytest.mark.parametrize("strategy, piece", [("rightmost", "0:5"), ("middle", "0:4")])
def test_reduce_alternatives(strategy, piece):
    out = reduce_to_words(PIECES, SPANS, strategy)
    np.testing.assert_array_equal(out.row("0:2"), PIECES.row(piece))


def test_reduce_mean():
    out = reduce_to_words(PIECES, SPANS, "mean")
    np.testing.assert_allclose(out.row("0:2"), [4.0, 40.0])
    np.testing.assert_allclose(out.row("0:1"), [1.5, 15.0])


def test_reduce_missing_piece():
    with pytest.raises(MissingEmbedding):
        reduce_to_words(PIECES, {1: [(0, 2)]})


def test_unit_normalize():
    e = emb(["0:0", "0:1"], [[3.0, 4.0], [0.0, 0.0]])
    np.testing.assert_allclose(unit_normalize(e).vectors, [[0.6, 0.8], [0.0, 0.0]])
