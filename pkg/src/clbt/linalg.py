"""Dense linear algebra primitives.

Matrices are plain 2-D ``float64`` numpy arrays.  The SVD is a one-sided
(Hestenes) Jacobi iteration with a round-robin pair ordering, so each
rotation step is vectorised over ``n/2`` disjoint column pairs.
"""
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import InvalidDimension, InvalidMatrix, NumericalFailure, SingularMatrix

MAX_SWEEPS = 30
_EPS = np.finfo(np.float64).eps


class SvdFactors(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def as_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D float64 array or raise InvalidMatrix."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidMatrix(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name} contains NaN or Inf")
    return a


def _round_robin(n):
    """Yield index arrays (p, q) covering every pair of range(n) once.

    ``n`` must be even.  Circle method: slot 0 stays fixed, the rest rotate.
    """
    order = np.arange(n)
    half = n // 2
    for _ in range(n - 1):
        yield order[:half].copy(), order[::-1][:half].copy()
        order = np.concatenate(([order[0]], order[-1:], order[1:-1]))


def _jacobi_rows(b, max_sweeps):
    """Mutually orthogonalise the rows of ``b`` in place; return V.

    Rows of ``b`` are the columns of the matrix being decomposed; storing
    them as rows keeps every gather contiguous.  Squared row norms are
    recomputed once per sweep and updated in between with the exact
    rotation identities alpha' = alpha - t*gamma, beta' = beta + t*gamma.
    """
    n, m = b.shape
    vt = np.eye(n)
    tol = max(m, 2) * _EPS
    schedule = list(_round_robin(n))
    for _ in range(max_sweeps):
        rotated = False
        norms = np.einsum("ij,ij->i", b, b)
        for p, q in schedule:
            bp = b[p]
            bq = b[q]
            gamma = np.einsum("ij,ij->i", bp, bq)
            alpha = norms[p]
            beta = norms[q]
            active = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            if not active.all():
                p, q = p[active], q[active]
                bp, bq = bp[active], bq[active]
                alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            norms[p] = np.maximum(alpha - t * gamma, 0.0)
            norms[q] = np.maximum(beta + t * gamma, 0.0)
            c = c[:, None]
            s = s[:, None]
            b[p] = c * bp - s * bq
            b[q] = s * bp + c * bq
            vp, vq = vt[p], vt[q]
            vt[p] = c * vp - s * vq
            vt[q] = s * vp + c * vq
        if not rotated:
            return vt.T
    raise NumericalFailure(f"Jacobi SVD did not converge within {max_sweeps} sweeps")


def _complete_basis(u, good):
    """Replace the columns of ``u`` not flagged ``good`` by an orthonormal complement."""
    m, r = u.shape
    k = int(good.sum())
    if k == r:
        return u
    q, _ = np.linalg.qr(np.hstack([u[:, good], np.eye(m)]))
    out = u.copy()
    out[:, ~good] = q[:, k:k + (r - k)]
    return out


def svd(m, max_sweeps=MAX_SWEEPS):
    """Thin SVD ``m = u @ diag(sigma) @ v.T`` with r = min(rows, cols).

    Singular values are non-increasing.  Each ``u`` column is signed so its
    largest-magnitude entry is non-negative (``v`` flipped to match).
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if min(rows, cols) < 1:
        raise InvalidMatrix(f"empty matrix of shape {a.shape}")
    if rows < cols:
        f = svd(a.T, max_sweeps)
        return _normalize_signs(f.v, f.sigma, f.u)

    work = np.zeros((cols + cols % 2, rows))
    work[:cols] = a.T
    v = _jacobi_rows(work, max_sweeps)[:cols, :cols]
    work = work[:cols].T

    sigma = np.linalg.norm(work, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, work, v = sigma[order], work[:, order], v[:, order]

    floor = max(rows, cols) * _EPS * (sigma[0] if sigma[0] > 0 else 1.0)
    good = sigma > floor
    u = np.zeros_like(work)
    u[:, good] = work[:, good] / sigma[good]
    sigma = np.where(good, sigma, 0.0)
    u = _complete_basis(u, good)
    return _normalize_signs(u, sigma, v)


def _normalize_signs(u, sigma, v):
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return SvdFactors(u * signs, sigma, v * signs)


def random_orthogonal(d, seed):
    """Seeded d x d orthogonal matrix from the QR of a Gaussian matrix.

    R's diagonal is made positive so the result is Haar distributed and
    does not depend on the LAPACK sign convention.
    """
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    g = np.random.default_rng(seed).standard_normal((d, d))
    q, r = np.linalg.qr(g)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs


def solve_spd(a, b):
    """Solve ``a @ s = b`` for symmetric positive definite ``a`` by Cholesky."""
    a = as_matrix(a, "a")
    b = np.asarray(b, dtype=np.float64)
    vector = b.ndim == 1
    b = as_matrix(b.reshape(-1, 1) if vector else b, "b")
    k = a.shape[0]
    if a.shape != (k, k) or b.shape[0] != k:
        raise InvalidMatrix(f"incompatible shapes {a.shape} and {b.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > 1e-10 * scale:
        raise SingularMatrix("matrix is not symmetric")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"Cholesky failed: {exc}") from None
    s = scipy.linalg.cho_solve(factor, b, check_finite=False)
    return s.ravel() if vector else s


def pca_project_2d(m):
    """Project mean-centred rows onto the top two right singular vectors."""
    a = as_matrix(m)
    if a.shape[0] < 2 or a.shape[1] < 2:
        raise InvalidMatrix(f"need at least 2 rows and 2 columns, got {a.shape}")
    centred = a - a.mean(axis=0)
    # R from a QR of the data has the same right singular vectors and is
    # only cols x cols.
    if centred.shape[0] > centred.shape[1]:
        _, r = np.linalg.qr(centred)
        basis = svd(r).v
    else:
        basis = svd(centred).v
    return centred @ basis[:, :2]
