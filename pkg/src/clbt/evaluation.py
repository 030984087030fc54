"""Intrinsic evaluation of a learned map, synthetic data and data-size ablation.

Retrieval is exhaustive cosine nearest-neighbour search of transformed
target rows against the source rows of the same test set; the correct
neighbour of query i is row i.  Ties are broken by row index and rows
with norm below ``ZERO_NORM`` rank below every nonzero candidate.
"""
import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix, PairedEmbeddings
from .errors import DimensionError, InvalidSpec
from .fit import FitConfig, fit, objective
from .linalg import pca_project_2d, random_orthogonal

DEFAULT_KS = (1, 5, 10)
ZERO_NORM = 1e-12
QUERY_BLOCK = 1024


def fmt(x):
    """Decimal float with 9 significant digits, as used in every CSV export."""
    return f"{x:.9g}"


@dataclass
class EvalReport:
    n_eval: int
    precision_at_k: dict
    mean_cosine_aligned: float
    mean_residual: float
    mean_cross_lingual_distance_before: float
    mean_cross_lingual_distance_after: float

    def to_dict(self):
        d = asdict(self)
        d["precision_at_k"] = {str(k): v for k, v in sorted(self.precision_at_k.items())}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self):
        lines = [f"pairs evaluated:        {self.n_eval}"]
        for k, p in sorted(self.precision_at_k.items()):
            lines.append(f"P@{k:<3d}                  {p:.4f}")
        before = self.mean_cross_lingual_distance_before
        lines += [
            f"mean aligned cosine:    {self.mean_cosine_aligned:.6f}",
            f"rms residual:           {self.mean_residual:.6g}",
            "distance before/after:  "
            + ("n/a" if before is None else f"{before:.6g}")
            + f" -> {self.mean_cross_lingual_distance_after:.6g}",
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class SynthSpec:
    n: int
    d: int
    noise_sigma: float = 0.0
    seed: int = 0
    planted: str = "orthogonal"
    n_test: int = 1000

    def __post_init__(self):
        if self.n < 1 or self.d < 1 or self.n_test < 0:
            raise InvalidSpec("need n >= 1, d >= 1 and n_test >= 0")
        if not self.noise_sigma >= 0:
            raise InvalidSpec("noise_sigma must be >= 0")
        if self.planted not in ("orthogonal", "linear"):
            raise InvalidSpec(f"planted must be 'orthogonal' or 'linear', got {self.planted!r}")


@dataclass
class AblationRow:
    pair_count: int
    report: EvalReport
    train_objective: float
    test_objective: float


@dataclass
class AblationReport:
    method: str
    rows: list = field(default_factory=list)

    CSV_FIELDS = (
        "pair_count", "p_at_1", "p_at_5", "p_at_10", "mean_cosine_aligned",
        "mean_residual", "train_objective", "test_objective",
    )

    def to_dict(self):
        return {
            "method": self.method,
            "rows": [
                {
                    "pair_count": r.pair_count,
                    "report": r.report.to_dict(),
                    "train_objective": r.train_objective,
                    "test_objective": r.test_objective,
                }
                for r in self.rows
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_FIELDS)
        for r in self.rows:
            p = r.report.precision_at_k
            writer.writerow(
                [r.pair_count]
                + [fmt(p.get(k, float("nan"))) for k in DEFAULT_KS]
                + [fmt(r.report.mean_cosine_aligned), fmt(r.report.mean_residual),
                   fmt(r.train_objective), fmt(r.test_objective)]
            )
        return buf.getvalue()

    def to_text(self):
        lines = [f"method {self.method}", "  pairs      P@1     test objective"]
        for r in self.rows:
            lines.append(f"  {r.pair_count:<8d} {r.report.precision_at_k.get(1, float('nan')):.4f}   {r.test_objective:.6g}")
        return "\n".join(lines)


def planted_map(spec, seed):
    if spec.planted == "orthogonal":
        return random_orthogonal(spec.d, seed)
    rng = np.random.default_rng(seed)
    left = random_orthogonal(spec.d, rng.integers(2**63))
    right = random_orthogonal(spec.d, rng.integers(2**63))
    # singular values in [1, 10] bound the condition number by 10
    scales = rng.uniform(1.0, 10.0, size=spec.d)
    return (left * scales) @ right.T


def generate_synthetic(spec):
    """Seeded (train, test, R) with Y = X R^T + noise_sigma * Gaussian noise."""
    map_seed, x_seed, noise_seed = np.random.SeedSequence(spec.seed).generate_state(3, dtype=np.uint64)
    r = planted_map(spec, int(map_seed))
    total = spec.n + spec.n_test
    x = np.random.default_rng(int(x_seed)).standard_normal((total, spec.d))
    y = x @ r.T
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * np.random.default_rng(int(noise_seed)).standard_normal((total, spec.d))
    train = PairedEmbeddings(x[:spec.n], y[:spec.n])
    test = PairedEmbeddings(x[spec.n:], y[spec.n:]) if spec.n_test else None
    return train, test, r


def as_embedding_matrices(pairs):
    """Key the rows of a PairedEmbeddings as ``"i:0"`` on both sides."""
    keys = [f"{i}:0" for i in range(pairs.n)]
    return EmbeddingMatrix(keys, pairs.x), EmbeddingMatrix(keys, pairs.y)


def _unit_rows(a):
    norms = np.linalg.norm(a, axis=1)
    zero = norms < ZERO_NORM
    unit = a / np.where(zero, 1.0, norms)[:, None]
    unit[zero] = 0.0
    return unit, zero


def retrieval_ranks(queries, candidates):
    """Rank (0-based) of candidate i among all candidates for query i."""
    q, _ = _unit_rows(queries)
    c, c_zero = _unit_rows(candidates)
    n = q.shape[0]
    ranks = np.empty(n, dtype=np.int64)
    cols = np.arange(n)
    for start in range(0, n, QUERY_BLOCK):
        stop = min(start + QUERY_BLOCK, n)
        sims = q[start:stop] @ c.T
        sims[:, c_zero] = -np.inf
        rows = np.arange(stop - start)
        own = sims[rows, start + rows][:, None]
        ahead = (sims > own) | ((sims == own) & (cols[None, :] < (start + rows)[:, None]))
        ranks[start:stop] = ahead.sum(axis=1)
    return ranks


def evaluate(transform, test, ks=DEFAULT_KS):
    """Retrieval precision, aligned cosine, residual and distance statistics."""
    w = transform.w if hasattr(transform, "w") else np.asarray(transform, dtype=np.float64)
    if w.shape != (test.source_dim, test.target_dim):
        raise DimensionError(
            f"transform shape {w.shape} incompatible with test pairs "
            f"({test.target_dim} -> {test.source_dim})"
        )
    ks = tuple(sorted(set(int(k) for k in ks)))
    if not ks or ks[0] < 1:
        raise InvalidSpec("k values must be >= 1")
    mapped = test.x @ w.T
    ranks = retrieval_ranks(mapped, test.y)
    precision = {k: float(np.mean(ranks < k)) for k in ks}

    um, _ = _unit_rows(mapped)
    uy, _ = _unit_rows(test.y)
    cosine = float(np.mean(np.einsum("ij,ij->i", um, uy)))
    residual = mapped - test.y
    sq = np.einsum("ij,ij->i", residual, residual)
    before = None
    if test.target_dim == test.source_dim:
        before = float(np.mean(np.linalg.norm(test.x - test.y, axis=1)))
    return EvalReport(
        n_eval=test.n,
        precision_at_k=precision,
        mean_cosine_aligned=cosine,
        mean_residual=float(np.sqrt(np.mean(sq))),
        mean_cross_lingual_distance_before=before,
        mean_cross_lingual_distance_after=float(np.mean(np.sqrt(sq))),
    )


def ablate(pairs, counts, config=None, eval_set=None, ks=DEFAULT_KS, resample_seed=None):
    """Fit on growing training subsets and evaluate each on ``eval_set``.

    Subsets are prefixes of ``pairs`` unless ``resample_seed`` is given, in
    which case each count draws its own seeded random subset.
    """
    config = config or FitConfig()
    counts = [int(c) for c in counts]
    if not counts:
        raise InvalidSpec("no pair counts given")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise InvalidSpec(f"pair counts must be strictly increasing: {counts}")
    if counts[0] < 1 or counts[-1] > pairs.n:
        raise InvalidSpec(f"pair counts must lie in [1, {pairs.n}], got {counts}")
    if eval_set is None:
        raise InvalidSpec("an evaluation set is required")
    rng = None if resample_seed is None else np.random.default_rng(resample_seed)
    report = AblationReport(config.method)
    for c in counts:
        subset = pairs.head(c) if rng is None else pairs.take(np.sort(rng.choice(pairs.n, c, replace=False)))
        transform, _ = fit(subset, config)
        report.rows.append(
            AblationRow(c, evaluate(transform, eval_set, ks), transform.objective, objective(transform, eval_set))
        )
    return report


def export_projection(emb_a, emb_b, labels=None, set_names=("a", "b")):
    """2-D PCA of both sets stacked; returns CSV text ``key,set,label,x,y``.

    ``labels`` maps keys to label strings; missing labels are left empty.
    """
    if emb_a.dim != emb_b.dim:
        raise DimensionError(f"cannot project sets of dims {emb_a.dim} and {emb_b.dim} together")
    labels = labels or {}
    points = pca_project_2d(np.vstack([emb_a.vectors, emb_b.vectors]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "set", "label", "x", "y"])
    rows = [(k, set_names[0]) for k in emb_a.keys] + [(k, set_names[1]) for k in emb_b.keys]
    for (key, name), (px, py) in zip(rows, points):
        writer.writerow([key, name, labels.get(key, ""), fmt(px), fmt(py)])
    return buf.getvalue()
