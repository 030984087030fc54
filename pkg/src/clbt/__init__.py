"""Offline linear alignment of contextual embeddings across languages."""

__version__ = "0.1.0"

from .alignment import (
    AlignmentLinkSet,
    BitextSentence,
    ContextualPair,
    extract_pairs,
    parse_bitext,
    parse_pharaoh,
    resolve_one_to_one,
)
from .embeddings import (
    EmbeddingMatrix,
    PairedEmbeddings,
    apply_transform,
    assemble_pairs,
    reduce_to_words,
)
from .evaluation import EvalReport, SynthSpec, ablate, evaluate, export_projection, generate_synthetic
from .fit import FitConfig, FitTrace, TransformMatrix, fit, fit_gd, fit_lsq, fit_procrustes, objective
from .formats import read_embeddings, read_transform, write_embeddings, write_transform
from .linalg import pca_project_2d, random_orthogonal, solve_spd, svd
from .wordpiece import WordPieceVocab, word_to_piece_spans, wordpiece_tokenize
