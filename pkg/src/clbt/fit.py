"""Learning the linear map W with W x_i ~ y_i (x = target, y = source).

Three solvers share the mean squared residual objective:

* ``fit_procrustes``: orthogonal W from the SVD of the cross-covariance Y^T X.
* ``fit_gd``: unconstrained W trained with Adam.
* ``fit_lsq``: unconstrained closed form W = (Y^T X)(X^T X)^-1.

The closed-form fitters only need Gram statistics, accumulated in one
streaming pass over row blocks, so memory is O(d^2) regardless of n.
"""
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError, InvalidSpec, NumericalFailure, SingularMatrix
from .linalg import solve_spd, svd

METHODS = ("svd", "gd", "lsq")
BLOCK_ROWS = 4096
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True, eq=False)
class TransformMatrix:
    w: np.ndarray
    method: str
    orthogonal: bool
    objective: float
    n_train: int
    ridge: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidSpec(f"unknown method {self.method!r}")
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 2:
            raise DimensionError(f"transform must be 2-D, got shape {w.shape}")
        if not np.isfinite(self.objective) or self.objective < 0:
            raise NumericalFailure(f"objective must be finite and >= 0, got {self.objective}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def out_dim(self):
        return self.w.shape[0]

    @property
    def in_dim(self):
        return self.w.shape[1]

    def orthogonality_error(self):
        return float(np.linalg.norm(self.w.T @ self.w - np.eye(self.in_dim)))


@dataclass(frozen=True)
class FitConfig:
    """Solver choice and hyperparameters.

    Adam defaults are learning rate 0.001, beta1 0.9, beta2 0.999.
    ``batch_size=None`` means full batch.  Training stops once the relative
    objective decrease over ``window`` epochs drops below ``rel_tolerance``.
    """

    method: str = "svd"
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = None
    max_epochs: int = 5000
    rel_tolerance: float = 1e-9
    window: int = 50
    seed: int = 0
    l2_weight: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidSpec(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.learning_rate > 0:
            raise InvalidSpec("learning_rate must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidSpec("beta1 and beta2 must lie in [0, 1)")
        if self.max_epochs < 1:
            raise InvalidSpec("max_epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidSpec("batch_size must be >= 1")
        if self.window < 1 or self.rel_tolerance < 0 or self.l2_weight < 0 or self.epsilon <= 0:
            raise InvalidSpec("window >= 1, rel_tolerance >= 0, l2_weight >= 0, epsilon > 0 required")

    def to_dict(self):
        return asdict(self)


@dataclass
class FitTrace:
    objectives: list = field(default_factory=list)
    wall_time: float = 0.0
    stop_reason: str = "epoch budget"

    @property
    def epochs(self):
        return len(self.objectives)


def _blocks(pairs, block_rows=None):
    block_rows = block_rows or BLOCK_ROWS
    for start in range(0, pairs.n, block_rows):
        yield pairs.x[start:start + block_rows], pairs.y[start:start + block_rows]


def _cross(a, b):
    # a^T b through a contiguous copy: numpy would route x^T x to SYRK and
    # y^T x to GEMM, and the two disagree in the last bits when y == x.
    return np.ascontiguousarray(a.T) @ b


@dataclass
class GramStats:
    xx: np.ndarray
    yx: np.ndarray
    yy_trace: float
    n: int

    @classmethod
    def accumulate(cls, pairs, with_xx=True):
        dx, dy = pairs.target_dim, pairs.source_dim
        xx = np.zeros((dx, dx)) if with_xx else None
        yx = np.zeros((dy, dx))
        yy = 0.0
        for xb, yb in _blocks(pairs):
            if with_xx:
                xx += _cross(xb, xb)
            yx += _cross(yb, xb)
            yy += float(np.einsum("ij,ij->", yb, yb))
        return cls(xx, yx, yy, pairs.n)

    def objective(self, w):
        """Mean squared residual from the Gram statistics alone."""
        quad = float(np.einsum("ij,ij->", w @ self.xx, w))
        value = (quad - 2.0 * float(np.einsum("ij,ij->", w, self.yx)) + self.yy_trace) / self.n
        return max(value, 0.0)


def objective(transform, pairs):
    """Mean of ||W x_i - y_i||^2 over all pairs, streamed over row blocks."""
    w = transform.w if isinstance(transform, TransformMatrix) else np.asarray(transform, dtype=np.float64)
    if w.shape != (pairs.source_dim, pairs.target_dim):
        raise DimensionError(
            f"transform shape {w.shape} incompatible with pairs "
            f"({pairs.target_dim} -> {pairs.source_dim})"
        )
    total = 0.0
    for xb, yb in _blocks(pairs):
        r = xb @ w.T - yb
        total += float(np.einsum("ij,ij->", r, r))
    return total / pairs.n


def fit_procrustes(pairs):
    """Orthogonal W minimising the squared residual.

    With Y^T X = U S V^T the minimiser is W = U V^T (it maximises
    trace(W X^T Y)).
    """
    if pairs.target_dim != pairs.source_dim:
        raise DimensionError(
            f"orthogonal fit needs equal dims, got {pairs.target_dim} and {pairs.source_dim}"
        )
    stats = GramStats.accumulate(pairs, with_xx=False)
    f = svd(stats.yx)
    w = f.u @ f.v.T
    return TransformMatrix(w, "svd", True, objective(w, pairs), pairs.n)


def fit_lsq(pairs):
    """Unconstrained least squares via the normal equations.

    A ridge of 1e-8 * trace(X^T X) / d is added when X^T X is singular or
    numerically so; the value used is recorded on the result.
    """
    stats = GramStats.accumulate(pairs)
    d = pairs.target_dim
    ridge = 0.0
    try:
        if pairs.n < d:
            raise SingularMatrix("fewer pairs than dimensions")
        diag = np.linalg.cholesky(stats.xx).diagonal()
        if diag.min() ** 2 < d * _EPS * diag.max() ** 2:
            raise SingularMatrix("Gram matrix is numerically singular")
        wt = solve_spd(stats.xx, stats.yx.T)
    except (SingularMatrix, np.linalg.LinAlgError):
        ridge = 1e-8 * float(np.trace(stats.xx)) / d
        if ridge <= 0:
            raise SingularMatrix("X^T X is zero; cannot regularise") from None
        wt = solve_spd(stats.xx + ridge * np.eye(d), stats.yx.T)
    w = wt.T
    return TransformMatrix(w, "lsq", False, objective(w, pairs), pairs.n, ridge)


def _initial_w(pairs):
    if pairs.source_dim == pairs.target_dim:
        return np.eye(pairs.source_dim)
    return np.zeros((pairs.source_dim, pairs.target_dim))


def fit_gd(pairs, config=None):
    """Minimise the mean squared residual (plus optional L2) with Adam.

    W starts at the identity when square and at zero otherwise.  Full batch
    steps use the Gram statistics, so an epoch costs O(d^3) rather than
    O(n d^2).  Returns ``(TransformMatrix, FitTrace)``.
    """
    config = config or FitConfig(method="gd")
    started = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    stats = GramStats.accumulate(pairs)
    w = _initial_w(pairs)
    m = np.zeros_like(w)
    v = np.zeros_like(w)
    step = 0
    trace = FitTrace()
    full_batch = config.batch_size is None or config.batch_size >= pairs.n

    def gradient(w, xb=None, yb=None):
        if xb is None:
            g = (2.0 / stats.n) * (w @ stats.xx - stats.yx)
        else:
            r = xb @ w.T - yb
            g = (2.0 / xb.shape[0]) * _cross(r, xb)
        if config.l2_weight:
            g = g + 2.0 * config.l2_weight * w
        return g

    for epoch in range(1, config.max_epochs + 1):
        if full_batch:
            batches = [None]
        else:
            order = rng.permutation(pairs.n)
            batches = [order[i:i + config.batch_size] for i in range(0, pairs.n, config.batch_size)]
        stationary = True
        for rows in batches:
            g = gradient(w) if rows is None else gradient(w, pairs.x[rows], pairs.y[rows])
            if np.any(g):
                stationary = False
            step += 1
            m = config.beta1 * m + (1.0 - config.beta1) * g
            v = config.beta2 * v + (1.0 - config.beta2) * g * g
            m_hat = m / (1.0 - config.beta1 ** step)
            v_hat = v / (1.0 - config.beta2 ** step)
            w = w - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)

        value = stats.objective(w)
        if config.l2_weight:
            value += config.l2_weight * float(np.einsum("ij,ij->", w, w))
        if not np.isfinite(value) or not np.all(np.isfinite(w)):
            raise NumericalFailure(f"gradient descent diverged at epoch {epoch}")
        trace.objectives.append(value)
        if stationary:
            trace.stop_reason = "converged"
            break
        if epoch > config.window:
            before = trace.objectives[-1 - config.window]
            if before - value <= config.rel_tolerance * max(before, np.finfo(float).tiny):
                trace.stop_reason = "converged"
                break

    trace.wall_time = time.perf_counter() - started
    return TransformMatrix(w, "gd", False, objective(w, pairs), pairs.n), trace


def fit(pairs, config=None):
    """Dispatch on ``config.method``; always returns ``(TransformMatrix, FitTrace | None)``."""
    config = config or FitConfig()
    if config.method == "svd":
        return fit_procrustes(pairs), None
    if config.method == "lsq":
        return fit_lsq(pairs), None
    return fit_gd(pairs, config)
