"""ZORO-FA and two non-adaptive baselines.

All three drive a :class:`~zorofa.oracle.CountingOracle`; budget exhaustion
ends a run cleanly and the trajectory up to the last completed step is kept.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cosamp import CosampConfig, cosamp
from .errors import BudgetExhausted, ConfigInfeasible
from .gradest import CS, FD, cs_gradient, fd_gradient, forward_differences, num_measurements
from .oracle import CountingOracle
from .sensing import measure, sample_bank, sensing_matrix

log = logging.getLogger(__name__)

BUDGET_EXHAUSTED = "BudgetExhausted"
SIGMA_CAP_REACHED = "SigmaCapReached"
MAX_OUTER_ITERATIONS = "MaxOuterIterations"

# What to do when s0 violates ceil(b s0 ln n) <= n/4.
INFEASIBLE_POLICIES = ("fd", "clamp", "run")


@dataclass(frozen=True)
class ZoroFaConfig:
    s0: int = 20
    sigma0: float = 2.5
    b: float = 1.0
    theta: float = 0.25
    eps: float = 1e-5
    budget: int = 10_000
    sigma_cap: Optional[float] = None  # defaults to 2**40 * sigma0
    seed: int = 0
    max_outer: int = 10 ** 6
    infeasible_s0: str = "fd"

    def __post_init__(self):
        if not 0.0 < self.theta < 0.5:
            raise ConfigInfeasible("theta must lie in (0, 1/2)")
        if self.b < 1.0:
            raise ConfigInfeasible("b must be >= 1")
        if not 0.0 < self.eps < 1.0:
            raise ConfigInfeasible("eps must lie in (0, 1)")
        if self.s0 < 1 or self.sigma0 <= 0:
            raise ConfigInfeasible("s0 and sigma0 must be positive")
        if self.budget < 1:
            raise ConfigInfeasible("budget must be positive")
        if self.infeasible_s0 not in INFEASIBLE_POLICIES:
            raise ConfigInfeasible(f"infeasible_s0 must be one of {INFEASIBLE_POLICIES}")

    @property
    def cap(self):
        return math.ldexp(self.sigma0, 40) if self.sigma_cap is None else self.sigma_cap


@dataclass(frozen=True)
class IterateRecord:
    k: int
    j_k: int
    s_k: int
    sigma_k: float
    path: str
    f_before: float
    f_after: float
    queries_cumulative: int
    h_k: float = math.nan
    trial_sizes: tuple = ()  # gradient-estimate query count for each inner j tried
    grad_norm_analytic: Optional[float] = None


@dataclass
class Trajectory:
    records: list
    x0: np.ndarray
    f0: float
    x_final: np.ndarray
    termination: str
    queries: int
    initial_queries: int = 1
    tail_queries: int = 0  # spent in an iteration that never completed
    fd_only: bool = False
    s0: Optional[int] = None
    bank_digest: Optional[str] = None
    notes: list = field(default_factory=list)

    @property
    def f_final(self):
        return self.records[-1].f_after if self.records else self.f0

    def f_values(self):
        return [self.f0] + [r.f_after for r in self.records]


def required_decrease(eps, sigma):
    """Sufficient-decrease threshold eps^2 / (2 sigma)."""
    return eps * eps / (2.0 * sigma)


def step0_feasible(s0, b, n):
    return num_measurements(b, s0, n) <= n / 4.0


def largest_feasible_s0(b, n):
    s = 0
    while step0_feasible(s + 1, b, n):
        s += 1
    return s


def theoretical_inner_bound(n, b, s0, sigma0, theta, L):
    """Upper bound (exclusive) on the accepted inner index j_k while ||grad f(x_k)|| > eps."""
    a = math.log2(2.0 * n / (b * s0 * math.log(n)))
    c = math.log2(2.0 * (theta + 1.0) ** 2 / (1.0 - 2.0 * theta) * L / sigma0)
    return max(1.0, a, c)


def _resolve_s0(config, n):
    """Returns ``(s0, fd_only, note)`` after applying the Step 0 constraint."""
    if step0_feasible(config.s0, config.b, n):
        return config.s0, False, None
    best = largest_feasible_s0(config.b, n)
    if best == 0:
        return config.s0, True, f"no s0 >= 1 satisfies ceil(b s0 ln n) <= n/4 for n={n}; forward differences only"
    if config.infeasible_s0 == "fd":
        return config.s0, True, f"s0={config.s0} violates ceil(b s0 ln n) <= n/4; forward differences only"
    if config.infeasible_s0 == "clamp":
        return best, False, f"s0={config.s0} violates ceil(b s0 ln n) <= n/4; clamped to {best}"
    return config.s0, False, f"s0={config.s0} violates ceil(b s0 ln n) <= n/4; running as given"


def zoro_fa(problem, config, oracle=None, diagnostics=True):
    """Run the fully adaptive method on ``problem``.

    The inner loop tries j = 0, 1, ... with s_j = 2^j s0 and sigma_j = 2^j sigma0,
    estimating the gradient by CoSaMP while m_j < n and by forward
    differences otherwise, and accepts the first trial point that lowers f
    by at least eps^2 / (2 sigma_j). f(x_k) is evaluated once and the accepted
    trial value is carried forward.
    """
    n = problem.dim
    if oracle is None:
        oracle = CountingOracle(problem.objective, config.budget)
    s0, fd_only, note = _resolve_s0(config, n)
    notes = []
    if note:
        log.warning(note)
        notes.append(note)
    bank = None if fd_only else sample_bank(n, config.seed)
    grad = problem.analytic_gradient if diagnostics else None
    theta, eps, b = config.theta, config.eps, config.b

    x = np.array(problem.x0, dtype=np.float64)
    start = oracle.count
    try:
        f_x = oracle(x)
    except BudgetExhausted:
        return Trajectory([], x.copy(), math.nan, x.copy(), BUDGET_EXHAUSTED, oracle.count,
                          0, oracle.count - start, fd_only, s0, None, notes)
    traj = Trajectory([], x.copy(), f_x, x.copy(), MAX_OUTER_ITERATIONS, 0,
                      oracle.count - start, 0, fd_only, s0,
                      bank.digest() if bank is not None else None, notes)

    k = 0
    while k < config.max_outer:
        iter_start = oracle.count
        gnorm = float(np.linalg.norm(grad(x))) if grad is not None else None
        trials = []
        j = 0
        accepted = None
        try:
            while True:
                s_j = s0 << j
                sigma_j = math.ldexp(config.sigma0, j)
                if sigma_j > config.cap:
                    traj.termination = SIGMA_CAP_REACHED
                    break
                if not fd_only and num_measurements(b, s_j, n) < n:
                    est = cs_gradient(oracle, x, f_x, bank, s_j, sigma_j, theta, eps, b)
                else:
                    est = fd_gradient(oracle, x, f_x, sigma_j, theta, eps)
                trials.append(est.queries)
                x_plus = x - est.g / sigma_j
                f_plus = oracle(x_plus)
                if f_x - f_plus >= required_decrease(eps, sigma_j):
                    accepted = (j, s_j, sigma_j, est, x_plus, f_plus)
                    break
                j += 1
        except BudgetExhausted:
            traj.termination = BUDGET_EXHAUSTED
        if accepted is None:
            traj.tail_queries = oracle.count - iter_start
            break
        j, s_j, sigma_j, est, x_plus, f_plus = accepted
        traj.records.append(IterateRecord(
            k=k, j_k=j, s_k=s_j, sigma_k=sigma_j, path=est.path,
            f_before=f_x, f_after=f_plus, queries_cumulative=oracle.count - start,
            h_k=est.h_used, trial_sizes=tuple(trials), grad_norm_analytic=gnorm,
        ))
        x, f_x = x_plus, f_plus
        k += 1

    traj.x_final = x
    traj.queries = oracle.count - start
    return traj


def _plain_descent(problem, step_size, budget, oracle, estimate, path, s_label, sigma_label):
    """Shared loop for the non-adaptive baselines: x <- x - step_size * g with no acceptance test.

    A step whose new f value could not be paid for is still taken and logged
    with ``f_after = nan``.
    """
    if oracle is None:
        oracle = CountingOracle(problem.objective, budget)
    x = np.array(problem.x0, dtype=np.float64)
    start = oracle.count
    try:
        f_x = oracle(x)
    except BudgetExhausted:
        return Trajectory([], x.copy(), math.nan, x.copy(), BUDGET_EXHAUSTED, oracle.count - start,
                          0, oracle.count - start)
    traj = Trajectory([], x.copy(), f_x, x.copy(), BUDGET_EXHAUSTED, 0, oracle.count - start)
    k = 0
    while True:
        iter_start = oracle.count
        try:
            g, h, size = estimate(oracle, x, f_x)
        except BudgetExhausted:
            traj.tail_queries = oracle.count - iter_start
            break
        x_new = x - step_size * g
        try:
            f_new = oracle(x_new)
        except BudgetExhausted:
            f_new = math.nan
        traj.records.append(IterateRecord(
            k=k, j_k=0, s_k=s_label, sigma_k=sigma_label, path=path,
            f_before=f_x, f_after=f_new, queries_cumulative=oracle.count - start,
            h_k=h, trial_sizes=(size,),
        ))
        x, f_x = x_new, f_new
        k += 1
        if math.isnan(f_new):
            break
    traj.x_final = x
    traj.queries = oracle.count - start
    return traj


def zoro_fixed(problem, s, step_size, h, b, budget, seed, iterations=10, oracle=None):
    """Non-adaptive ZORO baseline: fixed sparsity, radius and step, CoSaMP with a fixed iteration count."""
    n = problem.dim
    m = num_measurements(b, s, n)
    if m >= n:
        raise ConfigInfeasible(f"m={m} must be below n={n}")
    bank = sample_bank(n, seed)
    Z = sensing_matrix(bank, m)
    cfg = CosampConfig(sparsity=s, iterations=iterations)

    def estimate(oracle, x, f_x):
        y = measure(oracle, x, h, m, bank, f_x)
        return cosamp(Z, y, s, iterations, cfg).dense(), h, m

    traj = _plain_descent(problem, step_size, budget, oracle, estimate, CS, s, 1.0 / step_size)
    traj.bank_digest = bank.digest()
    return traj


def fd_descent(problem, step_size, h, budget, seed=0, oracle=None):
    """Gradient descent on full forward-difference gradients (n queries each)."""
    if step_size <= 0 or h <= 0:
        raise ValueError("step_size and h must be positive")
    n = problem.dim

    def estimate(oracle, x, f_x):
        return forward_differences(oracle, x, f_x, h), h, n

    return _plain_descent(problem, step_size, budget, oracle, estimate, FD, n, 1.0 / step_size)
