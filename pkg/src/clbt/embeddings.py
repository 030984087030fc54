"""Keyed embedding matrices, training-pair assembly and transform application."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EmptyTrainingSet, FormatError, MissingEmbedding

REDUCTIONS = ("leftmost", "mean", "middle", "rightmost")


def piece_key(sentence_index, piece_index):
    return f"{sentence_index}:{piece_index}"


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Rows of ``vectors`` keyed by ``"sentence:piece_index"`` strings."""

    keys: tuple
    vectors: np.ndarray
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        keys = tuple(self.keys)
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(keys):
            raise FormatError(f"{len(keys)} keys but vectors have shape {vectors.shape}")
        index = {k: i for i, k in enumerate(keys)}
        if len(index) != len(keys):
            raise FormatError("embedding keys must be unique")
        if not np.all(np.isfinite(vectors)):
            raise FormatError("embedding vectors contain NaN or Inf")
        vectors.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "_index", index)

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key):
        return key in self._index

    def row(self, key):
        try:
            return self.vectors[self._index[key]]
        except KeyError:
            raise MissingEmbedding(f"no embedding for key {key!r}") from None


@dataclass(frozen=True, eq=False)
class PairedEmbeddings:
    """Row i of ``x`` (target language) is aligned with row i of ``y`` (source)."""

    x: np.ndarray
    y: np.ndarray
    provenance: tuple = None
    skipped: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 2:
            raise DimensionError("paired embeddings must be 2-D")
        if x.shape[0] != y.shape[0]:
            raise DimensionError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] == 0:
            raise EmptyTrainingSet("no usable training pairs")
        if self.provenance is not None and len(self.provenance) != x.shape[0]:
            raise DimensionError("provenance length differs from row count")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def target_dim(self):
        return self.x.shape[1]

    @property
    def source_dim(self):
        return self.y.shape[1]

    def head(self, count):
        prov = None if self.provenance is None else self.provenance[:count]
        return PairedEmbeddings(self.x[:count], self.y[:count], prov)

    def take(self, rows):
        prov = None if self.provenance is None else tuple(self.provenance[i] for i in rows)
        return PairedEmbeddings(self.x[rows], self.y[rows], prov)


def assemble_pairs(records, target_emb, source_emb, strict=False):
    """Build X and Y from pair records using each word's first-piece key.

    Pairs whose keys are missing are skipped and counted, or raise
    MissingEmbedding when ``strict``.
    """
    if target_emb.dim == 0 or source_emb.dim == 0:
        raise DimensionError("embeddings have zero dimension")
    xs, ys, kept = [], [], []
    skipped = 0
    for rec in records:
        tkey = piece_key(rec.sentence_index, rec.target_piece)
        skey = piece_key(rec.sentence_index, rec.source_piece)
        if tkey not in target_emb or skey not in source_emb:
            if strict:
                missing = tkey if tkey not in target_emb else skey
                side = "target" if tkey not in target_emb else "source"
                raise MissingEmbedding(f"{side} embedding {missing!r} not found")
            skipped += 1
            continue
        xs.append(target_emb.row(tkey))
        ys.append(source_emb.row(skey))
        kept.append(rec)
    if not kept:
        raise EmptyTrainingSet(f"zero usable pairs ({skipped} skipped for missing keys)")
    return PairedEmbeddings(np.vstack(xs), np.vstack(ys), tuple(kept), skipped)


def apply_transform(transform, emb):
    """Map every vector v to W v; keys are preserved."""
    w = transform.w if hasattr(transform, "w") else np.asarray(transform)
    if emb.dim != w.shape[1]:
        raise DimensionError(f"embedding dim {emb.dim} != transform input dim {w.shape[1]}")
    return EmbeddingMatrix(emb.keys, emb.vectors @ w.T)


def reduce_to_words(emb, spans, strategy="leftmost"):
    """Collapse piece vectors to one vector per word.

    ``spans`` maps sentence index to that sentence's list of
    ``(first_piece_index, piece_count)``.  Output keys are
    ``"sentence:word_index"``.
    """
    if strategy not in REDUCTIONS:
        raise ValueError(f"unknown reduction {strategy!r}; choose from {REDUCTIONS}")
    keys, rows = [], []
    for sentence_index in sorted(spans):
        for word_index, (first, count) in enumerate(spans[sentence_index]):
            for piece in range(first, first + count):
                if piece_key(sentence_index, piece) not in emb:
                    raise MissingEmbedding(f"span of word {sentence_index}:{word_index} needs missing piece {piece}")
            if strategy == "leftmost":
                picked = [first]
            elif strategy == "rightmost":
                picked = [first + count - 1]
            elif strategy == "middle":
                picked = [first + (count - 1) // 2]
            else:
                picked = range(first, first + count)
            vecs = [emb.row(piece_key(sentence_index, p)) for p in picked]
            rows.append(vecs[0] if len(vecs) == 1 else np.mean(vecs, axis=0))
            keys.append(piece_key(sentence_index, word_index))
    vectors = np.vstack(rows) if rows else np.zeros((0, emb.dim))
    return EmbeddingMatrix(keys, vectors)


def unit_normalize(emb):
    """Scale every nonzero row to unit length (off by default in the pipeline)."""
    norms = np.linalg.norm(emb.vectors, axis=1, keepdims=True)
    return EmbeddingMatrix(emb.keys, emb.vectors / np.where(norms > 0, norms, 1.0))
