"""Experiment runners, data profiles, gradient-compressibility profiles and CSV output."""
import csv
import logging
import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .errors import MissingCoverage, NoAnalyticGradient
from .optimizers import Trajectory, ZoroFaConfig, fd_descent, zoro_fa, zoro_fixed
from .testfns import TestProblem, get_problem

log = logging.getLogger(__name__)

TRAJECTORY_HEADER = ("problem", "algorithm", "seed", "n", "k", "j_k", "s_k", "sigma_k",
                     "path", "f_before", "f_after", "queries_cumulative")
PROFILE_HEADER = ("tau", "algorithm", "alpha", "fraction")
COMPRESSIBILITY_HEADER = ("problem", "rank", "mean", "min", "max")


# --- runners ------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """A problem addressed by registry name; ``build(seed)`` draws the seed-dependent start."""

    name: str
    n: int
    params: tuple = ()

    def build(self, seed):
        return get_problem(self.name, self.n, seed=seed, **dict(self.params))


@dataclass(frozen=True)
class Solver:
    """A configured optimizer. ``kind`` is one of ``zoro-fa``, ``zoro``, ``fd-descent``.

    ``params`` may hold callables of n (e.g. ``s0 = 0.1 n``); they are resolved
    per problem before the run.
    """

    name: str
    kind: str
    params: tuple = ()

    def resolved(self, n):
        return {k: (v(n) if callable(v) else v) for k, v in self.params}

    def run(self, problem, budget, seed):
        p = self.resolved(problem.dim)
        if self.kind == "zoro-fa":
            return zoro_fa(problem, ZoroFaConfig(budget=budget, seed=seed, **p))
        if self.kind == "zoro":
            return zoro_fixed(problem, budget=budget, seed=seed, **p)
        if self.kind == "fd-descent":
            return fd_descent(problem, budget=budget, seed=seed, **p)
        raise ValueError(f"unknown solver kind {self.kind!r}")


@dataclass
class RunResult:
    problem: str
    algorithm: str
    seed: int
    n: int
    trajectory: Optional[Trajectory]
    f_history: list = field(default_factory=list)
    error: Optional[str] = None


def f_history(traj):
    """Running-best (queries_cumulative, f) pairs, starting at the initial point."""
    if traj is None or math.isnan(traj.f0):
        return []
    best = traj.f0
    hist = [(traj.initial_queries, best)]
    for r in traj.records:
        if not math.isnan(r.f_after) and r.f_after < best:
            best = r.f_after
        hist.append((r.queries_cumulative, best))
    return hist


def budget_for(n, multiplier):
    return int(round(multiplier * (n + 1)))


def _run_one(problem, solver, seed, budget_multiplier):
    if isinstance(problem, ProblemSpec):
        problem = problem.build(seed)
    budget = budget_for(problem.dim, budget_multiplier)
    try:
        traj = solver.run(problem, budget, seed)
    except Exception:  # one failing run must not sink the suite
        return RunResult(problem.name, solver.name, seed, problem.dim, None, [],
                         traceback.format_exc(limit=3))
    return RunResult(problem.name, solver.name, seed, problem.dim, traj, f_history(traj))


def _sort_key(r):
    return (r.problem, r.n, r.algorithm, r.seed)


def run_suite(problems, solvers, seeds, budget_multiplier, jobs=1):
    """Run every (problem, solver, seed) with a budget of budget_multiplier * (n + 1) queries.

    Results come back in canonical (problem, n, algorithm, seed) order
    whatever the execution order.
    """
    if not problems or not solvers or not seeds:
        raise ValueError("problems, solvers and seeds must be nonempty")
    tasks = [(p, a, s, budget_multiplier) for p in problems for a in solvers for s in seeds]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, *zip(*tasks)))
    else:
        results = [_run_one(*t) for t in tasks]
    for r in results:
        if r.error:
            log.error("run %s/%s/seed=%d failed:\n%s", r.problem, r.algorithm, r.seed, r.error)
    return sorted(results, key=_sort_key)


# --- data profiles --------------------------------------------------------------


def convergence_test(f_k, f0, fL, tau):
    """True when f_k <= fL + tau (f0 - fL)."""
    return f_k <= fL + tau * (f0 - fL)


@dataclass
class DataProfile:
    tau: float
    curves: dict  # algorithm -> list of (alpha, fraction) step locations

    def fraction(self, algorithm, alpha):
        """Evaluate the right-continuous step curve at alpha."""
        frac = 0.0
        for a, f in self.curves[algorithm]:
            if a <= alpha:
                frac = f
            else:
                break
        return frac


def _problem_key(r):
    return (r.problem, r.n)


def best_values(results):
    """Smallest f seen on each problem across every algorithm and seed."""
    fL = {}
    for r in results:
        vals = [f for _, f in r.f_history if not math.isnan(f)]
        if vals:
            key = _problem_key(r)
            fL[key] = min(fL.get(key, math.inf), min(vals))
    return fL


def solve_alpha(result, fL, tau):
    """First budget, in units of n+1 queries, at which the run passes the convergence test."""
    if not result.f_history:
        return math.inf
    f0 = result.f_history[0][1]
    for q, f in result.f_history:
        if convergence_test(f, f0, fL, tau):
            return q / (result.n + 1)
    return math.inf


def data_profile(results, tau):
    """Fraction of runs solved to tolerance tau versus budget alpha (n+1) for each algorithm."""
    problems = sorted({_problem_key(r) for r in results})
    algorithms = sorted({r.algorithm for r in results})
    have = {(_problem_key(r), r.algorithm) for r in results}
    missing = [(p, a) for p in problems for a in algorithms if (p, a) not in have]
    if missing:
        raise MissingCoverage(f"no runs for {missing[:5]}")
    fL = best_values(results)
    curves = {}
    for alg in algorithms:
        runs = [r for r in results if r.algorithm == alg]
        alphas = sorted(solve_alpha(r, fL.get(_problem_key(r), math.inf), tau) for r in runs)
        total = len(runs)
        points = [(0.0, 0.0)]
        for i, a in enumerate(alphas):
            if math.isinf(a):
                break
            frac = (i + 1) / total
            if a == points[-1][0]:
                points[-1] = (a, frac)
            else:
                points.append((a, frac))
        curves[alg] = points
    return DataProfile(tau, curves)


# --- gradient compressibility ------------------------------------------------------


@dataclass
class CompressibilityProfile:
    problem: str
    ranks: np.ndarray
    mean: np.ndarray
    min: np.ndarray
    max: np.ndarray


def compressibility_profile(problem, num_points=20, seed=0):
    """Sorted gradient magnitudes at points drawn from N(0, 10 I), aggregated per rank."""
    if problem.analytic_gradient is None:
        raise NoAnalyticGradient(problem.name)
    g = rng.stream(seed, rng.PROFILE)
    n = problem.dim
    mags = np.empty((num_points, n))
    for i in range(num_points):
        x = g.normal(0.0, math.sqrt(10.0), size=n)
        mags[i] = np.sort(np.abs(problem.analytic_gradient(x)))[::-1]
    return CompressibilityProfile(problem.name, np.arange(1, n + 1),
                                  mags.mean(axis=0), mags.min(axis=0), mags.max(axis=0))


# --- CSV --------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def trajectory_rows(results):
    for r in results:
        if r.trajectory is None:
            continue
        for rec in r.trajectory.records:
            yield (r.problem, r.algorithm, r.seed, r.n, rec.k, rec.j_k, rec.s_k,
                   float(rec.sigma_k), rec.path, float(rec.f_before), float(rec.f_after),
                   rec.queries_cumulative)


def write_trajectory_csv(results, path):
    _write(path, TRAJECTORY_HEADER, trajectory_rows(results))


def read_trajectory_csv(path):
    types = (str, str, int, int, int, int, int, float, str, float, float, int)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [tuple(t(v) for t, v in zip(types, row)) for row in reader]


def profile_rows(profiles):
    for prof in profiles:
        for alg in sorted(prof.curves):
            for alpha, frac in prof.curves[alg]:
                yield (float(prof.tau), alg, float(alpha), float(frac))


def write_profile_csv(profiles, path):
    _write(path, PROFILE_HEADER, profile_rows(profiles))


def write_compressibility_csv(profiles, path):
    rows = ((p.problem, int(k), float(a), float(b), float(c))
            for p in profiles for k, a, b, c in zip(p.ranks, p.mean, p.min, p.max))
    _write(path, COMPRESSIBILITY_HEADER, rows)


def write_csv(items, path):
    """Write run results, data profiles or compressibility profiles, choosing the schema by type."""
    items = list(items)
    if items and isinstance(items[0], DataProfile):
        write_profile_csv(items, path)
    elif items and isinstance(items[0], CompressibilityProfile):
        write_compressibility_csv(items, path)
    else:
        write_trajectory_csv(items, path)


# --- parameter rules that scale with n (module-level so runs stay picklable) -----


def s0_fraction(n, frac=0.1):
    """s0 = frac * n rounded to the nearest integer, at least 1."""
    return max(1, int(round(frac * n)))


def sigma0_inverse_log(n, frac=0.1):
    """sigma0 = 1 / (s0 ln n) with s0 from :func:`s0_fraction`."""
    return 1.0 / (s0_fraction(n, frac) * math.log(n))


def step_inverse_log(n, scale=0.005, frac=0.1):
    """ZORO step size scale / (s0 ln n)."""
    return scale / (s0_fraction(n, frac) * math.log(n))
