"""Gradient estimators: compressed sensing over Rademacher directions and forward differences."""
import math
from dataclasses import dataclass

import numpy as np

from .cosamp import CosampConfig, cosamp, halting_iterations
from .errors import DomainError, GateViolation
from .sensing import measure, sensing_matrix

CS = "CS"
FD = "FD"

# Differences smaller than this many ulps of |f(x)| are mostly rounding noise.
_PRECISION_ULPS = 1e3


@dataclass(frozen=True)
class GradEstimate:
    g: np.ndarray
    path: str
    h_used: float
    m_used: int
    queries: int
    precision_warning: bool = False
    rank_deficient: bool = False


def num_measurements(b, s, n):
    """m = ceil(b s ln n)."""
    return math.ceil(b * s * math.log(n))


def cs_radius(theta, eps, n, sigma):
    return theta * eps / (11.0 * n * sigma)


def fd_radius(theta, eps, n, sigma):
    return 2.0 * theta * eps / (sigma * math.sqrt(n))


def _imprecise(max_abs_diff, f_x):
    return max_abs_diff < _PRECISION_ULPS * np.finfo(float).eps * abs(f_x)


def cs_gradient(oracle, x, f_x, bank, s_j, sigma_j, theta, eps, b, cosamp_config=None):
    """Sparse gradient estimate from m_j = ceil(b s_j ln n) Rademacher differences."""
    n = bank.n
    m = num_measurements(b, s_j, n)
    if m >= n:
        raise GateViolation(f"m={m} >= n={n}; use the forward-difference path")
    h = cs_radius(theta, eps, n, sigma_j)
    y = measure(oracle, x, h, m, bank, f_x)
    Z = sensing_matrix(bank, m)
    iters = halting_iterations(theta)
    cfg = cosamp_config or CosampConfig(sparsity=s_j, iterations=iters)
    est = cosamp(Z, y, s_j, iters, cfg)
    warn = _imprecise(np.abs(y).max(initial=0.0) * math.sqrt(m) * h, f_x)
    return GradEstimate(est.dense(), CS, h, m, m, warn, est.rank_deficient)


def forward_differences(oracle, x, f_x, h):
    """g_i = (f(x + h e_i) - f(x)) / h for every coordinate; n oracle calls."""
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    probe = x.copy()
    for i in range(x.shape[0]):
        probe[i] = x[i] + h
        g[i] = (oracle(probe) - f_x) / h
        probe[i] = x[i]
    return g


def fd_gradient(oracle, x, f_x, sigma_j, theta, eps):
    """Forward-difference gradient with radius 2 theta eps / (sigma_j sqrt(n))."""
    if sigma_j <= 0:
        raise ValueError("sigma_j must be positive")
    n = np.asarray(x).shape[0]
    h = fd_radius(theta, eps, n, sigma_j)
    g = forward_differences(oracle, x, f_x, h)
    warn = _imprecise(np.abs(g).max(initial=0.0) * h, f_x)
    return GradEstimate(g, FD, h, n, n, warn)


@dataclass(frozen=True)
class EffectiveSparsityQuery:
    theta: float
    p: float


def effective_sparsity(theta, p=None):
    """n-independent sparsity that makes CoSaMP estimates theta-accurate for p-compressible gradients.

    Accepts either ``(theta, p)`` or a single :class:`EffectiveSparsityQuery`.
    """
    if isinstance(theta, EffectiveSparsityQuery):
        theta, p = theta.theta, theta.p
    if not 0.0 < theta < 1.0 or not 0.0 < p < 1.0:
        raise DomainError("theta and p must lie in (0, 1)")
    inner = 13.2 / math.sqrt(2.0 / p - 1.0) + 11.0 / (1.0 / p - 1.0)
    return (4.0 / theta * inner) ** (2.0 * p / (2.0 - p))


def compressibility_tail_bounds(grad, s, p):
    """Check the l1 and l2 tail bounds for the best s-term approximation of a p-compressible vector.

    Returns ``(l1_ok, l2_ok)``.
    """
    a = np.sort(np.abs(np.asarray(grad, dtype=np.float64)))[::-1]
    norm = np.linalg.norm(a)
    tail = a[s:]
    l1_bound = norm / (1.0 / p - 1.0) * s ** (1.0 - 1.0 / p)
    l2_bound = norm / math.sqrt(2.0 / p - 1.0) * s ** (0.5 - 1.0 / p)
    slack = 1e-12 * norm
    return bool(tail.sum() <= l1_bound + slack), bool(np.linalg.norm(tail) <= l2_bound + slack)
