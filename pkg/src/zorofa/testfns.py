"""Benchmark objectives: sparse-gradient test functions and an MGH subset.

MGH definitions follow More, Garbow & Hillstrom, "Testing unconstrained
optimization software", ACM TOMS 7 (1981), with f(x) = sum_i r_i(x)^2.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import rng
from .cosamp import top_k
from .errors import IncompatibleDimension, UnknownProblem
from .oracle import Objective, as_vector


@dataclass(frozen=True)
class TestProblem:
    __test__ = False  # keep pytest from collecting this class

    name: str
    dim: int
    x0: np.ndarray
    objective: Objective
    analytic_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.x0.shape != (self.dim,):
            raise IncompatibleDimension(f"x0 has shape {self.x0.shape}, expected ({self.dim},)")
        self.x0.setflags(write=False)

    @property
    def known_flow(self):
        return self.objective.known_flow

    @property
    def known_lipschitz(self):
        return self.objective.known_lipschitz

    def __call__(self, x):
        return self.objective(x)


def _problem(name, fn, x0, known_flow=None, known_lipschitz=None):
    x0 = as_vector(x0)
    obj = Objective(x0.shape[0], fn, known_flow=known_flow, known_lipschitz=known_lipschitz)
    return TestProblem(name, x0.shape[0], x0, obj, getattr(fn, "gradient", None))


# --- sparse-gradient functions ------------------------------------------------


class MaxSSquared:
    """Sum of the s largest squared entries of x."""

    def __init__(self, n, s):
        self.n, self.s = n, s

    def __call__(self, x):
        sq = np.asarray(x, dtype=np.float64) ** 2
        if self.s == self.n:
            return float(sq.sum())
        return float(np.partition(sq, self.n - self.s)[self.n - self.s:].sum())

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        g = np.zeros_like(x)
        idx = top_k(x, self.s)
        g[idx] = 2.0 * x[idx]
        return g


class NesterovWorst:
    """(lam/8)(x1^2 + sum_{i<=s} (x_i - x_{i+1})^2 + x_s^2) - (lam/4) x1."""

    def __init__(self, n, s, lam):
        self.n, self.s, self.lam = n, s, float(lam)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        s = self.s
        d = x[:s] - x[1:s + 1]
        quad = x[0] ** 2 + np.dot(d, d) + x[s - 1] ** 2
        return float(self.lam / 8.0 * quad - self.lam / 4.0 * x[0])

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        s = self.s
        g = np.zeros_like(x)
        d = x[:s] - x[1:s + 1]
        g[:s] += 2.0 * d
        g[1:s + 1] -= 2.0 * d
        g[0] += 2.0 * x[0]
        g[s - 1] += 2.0 * x[s - 1]
        g *= self.lam / 8.0
        g[0] -= self.lam / 4.0
        return g

    def quadratic_form(self):
        """Matrix M of the quadratic part on the first s+1 coordinates."""
        s = self.s
        M = np.zeros((s + 1, s + 1))
        M[0, 0] += 1.0
        for i in range(s):
            M[i, i] += 1.0
            M[i + 1, i + 1] += 1.0
            M[i, i + 1] -= 1.0
            M[i + 1, i] -= 1.0
        M[s - 1, s - 1] += 1.0
        return M


def max_s_squared(n, s):
    if not 1 <= s <= n:
        raise IncompatibleDimension(f"need 1 <= s <= n, got s={s}, n={n}")
    return _problem("max_s_squared", MaxSSquared(n, s), np.zeros(n), known_flow=0.0)


def nesterov_worst(n, s, lam=8.0):
    if not 1 <= s < n:
        raise IncompatibleDimension(f"need 1 <= s < n, got s={s}, n={n}")
    if lam <= 0:
        raise ValueError("lam must be positive")
    fn = NesterovWorst(n, s, lam)
    M = fn.quadratic_form()
    # Hessian is (lam/4) M; the minimum solves M x = e1.
    lipschitz = float(lam / 4.0 * np.linalg.eigvalsh(M)[-1])
    flow = float(-lam / 8.0 * np.linalg.solve(M, np.eye(s + 1)[0])[0])
    return _problem("nesterov_worst", fn, np.zeros(n), known_flow=flow, known_lipschitz=lipschitz)


def sparse_benchmark_start(n, seed):
    """x0 ~ N(0, 10 I), drawn with numpy's ziggurat normal sampler."""
    return rng.stream(seed, rng.START, n).normal(0.0, np.sqrt(10.0), size=n)


class Quadratic:
    """0.5 x'Ax + c'x."""

    def __init__(self, A, c=None):
        self.A = np.array(A, dtype=np.float64)
        self.c = np.zeros(self.A.shape[0]) if c is None else np.array(c, dtype=np.float64)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ (self.A @ x) + self.c @ x)

    def gradient(self, x):
        return self.A @ np.asarray(x, dtype=np.float64) + self.c


def quadratic(A, x0, c=None, name="quadratic"):
    """Quadratic test problem; A must be symmetric. L is its spectral norm."""
    fn = Quadratic(A, c)
    eig = np.linalg.eigvalsh(fn.A)
    flow = None
    if eig[0] > 0:
        flow = float(-0.5 * fn.c @ np.linalg.solve(fn.A, fn.c))
    return _problem(name, fn, x0, known_flow=flow, known_lipschitz=float(np.abs(eig).max()))


# --- MGH subset -----------------------------------------------------------------


class _LeastSquares:
    def residuals(self, x):
        raise NotImplementedError

    def __call__(self, x):
        r = self.residuals(np.asarray(x, dtype=np.float64))
        return float(np.dot(r, r))


class ExtendedRosenbrock(_LeastSquares):
    def residuals(self, x):
        r = np.empty_like(x)
        r[0::2] = 10.0 * (x[1::2] - x[0::2] ** 2)
        r[1::2] = 1.0 - x[0::2]
        return r

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.residuals(x)
        g = np.empty_like(x)
        g[0::2] = 2.0 * (r[0::2] * (-20.0 * x[0::2]) - r[1::2])
        g[1::2] = 20.0 * r[0::2]
        return g


class Trigonometric(_LeastSquares):
    def residuals(self, x):
        n = x.shape[0]
        i = np.arange(1, n + 1)
        return n - np.cos(x).sum() + i * (1.0 - np.cos(x)) - np.sin(x)

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        n = x.shape[0]
        i = np.arange(1, n + 1)
        r = self.residuals(x)
        return 2.0 * (np.sin(x) * r.sum() + r * (i * np.sin(x) - np.cos(x)))


class ExtendedPowellSingular(_LeastSquares):
    def residuals(self, x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        r = np.empty_like(x)
        r[0::4] = a + 10.0 * b
        r[1::4] = np.sqrt(5.0) * (c - d)
        r[2::4] = (b - 2.0 * c) ** 2
        r[3::4] = np.sqrt(10.0) * (a - d) ** 2
        return r

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        r = self.residuals(x)
        r1, r2, r3, r4 = r[0::4], r[1::4], r[2::4], r[3::4]
        s5, s10 = np.sqrt(5.0), np.sqrt(10.0)
        g = np.empty_like(x)
        g[0::4] = 2.0 * (r1 + r4 * 2.0 * s10 * (a - d))
        g[1::4] = 2.0 * (10.0 * r1 + r3 * 2.0 * (b - 2.0 * c))
        g[2::4] = 2.0 * (s5 * r2 - r3 * 4.0 * (b - 2.0 * c))
        g[3::4] = 2.0 * (-s5 * r2 - r4 * 2.0 * s10 * (a - d))
        return g


class BroydenTridiagonal(_LeastSquares):
    def residuals(self, x):
        xp = np.concatenate(([0.0], x, [0.0]))
        return (3.0 - 2.0 * x) * x - xp[:-2] - 2.0 * xp[2:] + 1.0

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.residuals(x)
        g = 2.0 * r * (3.0 - 4.0 * x)
        g[:-1] -= 2.0 * r[1:]        # x_j appears as x_{i-1} in r_{j+1}
        g[1:] -= 4.0 * r[:-1]        # x_j appears as x_{i+1} in r_{j-1}
        return g


class DiscreteBoundary(_LeastSquares):
    def _grid(self, n):
        h = 1.0 / (n + 1)
        return h, h * np.arange(1, n + 1)

    def residuals(self, x):
        h, t = self._grid(x.shape[0])
        xp = np.concatenate(([0.0], x, [0.0]))
        return 2.0 * x - xp[:-2] - xp[2:] + 0.5 * h * h * (x + t + 1.0) ** 3

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        h, t = self._grid(x.shape[0])
        r = self.residuals(x)
        g = 2.0 * r * (2.0 + 1.5 * h * h * (x + t + 1.0) ** 2)
        g[:-1] -= 2.0 * r[1:]
        g[1:] -= 2.0 * r[:-1]
        return g


class PenaltyI(_LeastSquares):
    a = 1e-5

    def residuals(self, x):
        return np.concatenate((np.sqrt(self.a) * (x - 1.0), [np.dot(x, x) - 0.25]))

    def gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 2.0 * self.a * (x - 1.0) + 4.0 * (np.dot(x, x) - 0.25) * x


def _mgh_table():
    # name -> (class, dimension rule, standard start, known minimum or None)
    return {
        "rosex": (ExtendedRosenbrock, lambda n: n % 2 == 0 and n >= 2,
                  lambda n: np.tile([-1.2, 1.0], n // 2), 0.0),
        "trig": (Trigonometric, lambda n: n >= 1, lambda n: np.full(n, 1.0 / n), 0.0),
        "powell_singular_ext": (ExtendedPowellSingular, lambda n: n % 4 == 0 and n >= 4,
                                lambda n: np.tile([3.0, -1.0, 0.0, 1.0], n // 4), 0.0),
        "broyden_tridiag": (BroydenTridiagonal, lambda n: n >= 1, lambda n: -np.ones(n), 0.0),
        "discrete_boundary": (DiscreteBoundary, lambda n: n >= 1,
                              lambda n: (lambda t: t * (t - 1.0))(np.arange(1, n + 1) / (n + 1)), 0.0),
        "penalty1": (PenaltyI, lambda n: n >= 1, lambda n: np.arange(1.0, n + 1), None),
    }


MGH_NAMES = tuple(_mgh_table())


def mgh_problem(name, n, x0_scale=0):
    """MGH function ``name`` in dimension n, started at 10**x0_scale times the standard x0."""
    table = _mgh_table()
    if name not in table:
        raise UnknownProblem(name)
    if x0_scale not in (0, 1):
        raise ValueError("x0_scale must be 0 or 1")
    cls, ok, start, flow = table[name]
    if not ok(n):
        raise IncompatibleDimension(f"{name} is not defined for n={n}")
    x0 = 10.0 ** x0_scale * start(n)
    label = name if x0_scale == 0 else f"{name}_x10"
    return _problem(label, cls(), x0, known_flow=flow)


# --- registry ---------------------------------------------------------------


def get_problem(name, n, *, s=30, lam=8.0, x0_scale=0, seed=0):
    """Build a problem by CLI name. Sparse benchmarks start from N(0, 10 I)."""
    if name == "max_s_squared":
        p = max_s_squared(n, s)
    elif name == "nesterov_worst":
        p = nesterov_worst(n, s, lam)
    elif name in MGH_NAMES:
        return mgh_problem(name, n, x0_scale)
    else:
        raise UnknownProblem(name)
    return TestProblem(p.name, n, sparse_benchmark_start(n, seed), p.objective, p.analytic_gradient)


PROBLEM_NAMES = ("max_s_squared", "nesterov_worst") + MGH_NAMES
