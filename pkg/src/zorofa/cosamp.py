"""CoSaMP recovery of a sparse vector from linear measurements.

Runs a fixed number of iterations from v = 0; every selection step breaks
ties toward the lowest index so results are reproducible across platforms.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class CosampConfig:
    sparsity: int = 1
    iterations: int = 1
    ls_tolerance: float = 1e-10
    ls_max_steps: int = 2  # iterative-refinement passes after the QR solve

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.ls_tolerance <= 0:
            raise ValueError("ls_tolerance must be positive")


@dataclass(frozen=True)
class SparseEstimate:
    support: np.ndarray
    values: np.ndarray
    dim: int
    iterations_run: int = 0
    rank_deficient: bool = False

    def dense(self):
        v = np.zeros(self.dim)
        v[self.support] = self.values
        return v


def halting_iterations(theta):
    """ceil(log(theta/4) / log(0.5)): iterations that shrink the (1/2)^l term below theta/4."""
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    # Exact at powers of two, where floating-point log ratios can overshoot.
    q = 4.0 / theta
    k = math.ceil(math.log2(q))
    if k > 0 and 2.0 ** (k - 1) >= q:
        k -= 1
    return k


def top_k(u, k):
    """Sorted indices of the k largest |u_i|, lowest index first among ties."""
    a = np.abs(np.asarray(u, dtype=np.float64))
    if not 1 <= k <= a.shape[0]:
        raise ValueError(f"k must lie in [1, {a.shape[0]}], got {k}")
    order = np.argsort(-a, kind="stable")
    return np.sort(order[:k])


def least_squares_on_support(Z, y, T, config=None):
    """Minimize ||Z[:, T] b - y|| for b.

    Householder QR on the |T|-column submatrix, followed by up to
    ``config.ls_max_steps`` refinement passes. Rank deficiency (or more columns
    than rows) switches to the SVD minimum-norm solution. Returns
    ``(b, rank_deficient)``.
    """
    config = config or CosampConfig()
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T = np.asarray(T, dtype=np.intp)
    if T.size == 0:
        raise ValueError("support must be nonempty")
    A = Z[:, T]
    m, t = A.shape
    if t <= m:
        Q, R = np.linalg.qr(A)
        d = np.abs(np.diag(R))
        if d.min() > config.ls_tolerance * max(d.max(), np.finfo(float).tiny):
            b = np.linalg.solve(R, Q.T @ y) if t > 1 else (Q.T @ y) / R[0, 0]
            b = np.atleast_1d(b)
            scale = config.ls_tolerance * max(np.linalg.norm(y), np.finfo(float).tiny)
            for _ in range(config.ls_max_steps):
                r = y - A @ b
                if np.linalg.norm(A.T @ r) <= scale:
                    break
                b = b + np.linalg.solve(R, Q.T @ r)
            return b, False
    b = np.linalg.lstsq(A, y, rcond=config.ls_tolerance)[0]
    return b, True


def cosamp(Z, y, s, iterations, config=None):
    """Run ``iterations`` CoSaMP steps on min ||Zv - y|| s.t. ||v||_0 <= s.

    Each step: proxy u = Z^T r, merge the 2s largest |u_j| with the current
    support, least squares on the merged set, prune to the s largest, update
    the residual. Stops early only once ||r|| <= 1e-14 ||y||.
    """
    config = config or CosampConfig(sparsity=s, iterations=iterations)
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, n = Z.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if s < 1 or 2 * s > n:
        raise ValueError(f"need 1 <= s and 2s <= n, got s={s}, n={n}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    v = np.zeros(n)
    support = np.zeros(0, dtype=np.intp)
    ynorm = np.linalg.norm(y)
    r = y.copy()
    deficient = False
    done = 0
    for _ in range(iterations):
        if np.linalg.norm(r) <= 1e-14 * ynorm or ynorm == 0.0:
            break
        u = Z.T @ r
        merged = np.union1d(top_k(u, 2 * s), support)
        b, flag = least_squares_on_support(Z, y, merged, config)
        deficient |= flag
        keep = top_k(b, min(s, b.shape[0]))
        support = merged[keep]
        v = np.zeros(n)
        v[support] = b[keep]
        r = y - Z @ v
        done += 1
    return SparseEstimate(support=support, values=v[support], dim=n,
                          iterations_run=done, rank_deficient=deficient)
