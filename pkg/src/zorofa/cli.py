"""Command-line entry point: ``zorofa {sparse-bench,mgh-bench,grad-profile,single-run}``.

Settings are resolved as built-in defaults < ``--config`` INI file < flags and
written to ``resolved-config.ini`` in the output directory, so any output can
be regenerated with ``--config <dir>/resolved-config.ini``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""
import argparse
import configparser
import functools
import logging
import math
import os
import sys
from pathlib import Path

from . import bench
from .errors import IncompatibleDimension, UnknownProblem, ZorofaError
from .testfns import MGH_NAMES, PROBLEM_NAMES, get_problem

log = logging.getLogger("zorofa")

COMMANDS = ("sparse-bench", "mgh-bench", "grad-profile", "single-run")


class ConfigError(Exception):
    pass


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# (section, key) -> (type, default); defaults may differ per command.
_COMMON = {
    ("run", "seeds"): (str, "0"),
    ("run", "budget_mult"): (float, 350.0),
    ("run", "jobs"): (int, 0),
    ("run", "plots"): (_bool, True),
}

_SPARSE_FA = {
    ("zoro-fa", "s0"): (str, "20"),
    ("zoro-fa", "sigma0"): (str, "2.5"),
    ("zoro-fa", "eps"): (float, 1e-5),
    ("zoro-fa", "theta"): (float, 0.25),
    ("zoro-fa", "b"): (float, 1.0),
    ("zoro-fa", "s0_policy"): (str, "fd"),
}
_SPARSE_ZORO = {
    ("zoro", "s"): (str, "exact"),
    ("zoro", "step"): (str, "0.125"),
    ("zoro", "h"): (float, 1e-4),
    ("zoro", "b"): (float, 1.0),
    ("zoro", "iterations"): (int, 10),
}
_MGH_FA = {**_SPARSE_FA,
              ("zoro-fa", "s0"): (str, "0.1n"),
              ("zoro-fa", "sigma0"): (str, "auto"),
              ("zoro-fa", "eps"): (float, 0.01)}
_MGH_ZORO = {**_SPARSE_ZORO,
                ("zoro", "s"): (str, "0.1n"),
                ("zoro", "step"): (str, "auto"),
                ("zoro", "h"): (float, 5e-4)}

SCHEMA = {
    "sparse-bench": {
        **_COMMON,
        ("run", "n"): (int, 1000),
        ("run", "s"): (int, 30),
        ("run", "lam"): (float, 8.0),
        ("run", "problems"): (str, "max_s_squared,nesterov_worst"),
        **_SPARSE_FA, **_SPARSE_ZORO,
    },
    "mgh-bench": {
        **_COMMON,
        ("run", "n"): (str, "100,500,1000"),
        ("run", "problems"): (str, ",".join(MGH_NAMES)),
        ("run", "scales"): (str, "0,1"),
        ("run", "tau"): (str, "0.1,0.01,0.001"),
        **_MGH_FA, **_MGH_ZORO,
    },
    "grad-profile": {
        **_COMMON,
        ("run", "problem"): (str, "rosex"),
        ("run", "n"): (int, 500),
        ("run", "points"): (int, 20),
        ("run", "x0_scale"): (int, 0),
        ("run", "with_run"): (_bool, False),
        **_MGH_FA,
    },
    "single-run": {
        **_COMMON,
        ("run", "problem"): (str, "max_s_squared"),
        ("run", "algorithm"): (str, "zoro-fa"),
        ("run", "n"): (int, 200),
        ("run", "s"): (int, 10),
        ("run", "lam"): (float, 8.0),
        ("run", "x0_scale"): (int, 0),
        **_SPARSE_FA, **_SPARSE_ZORO,
        ("fd", "step"): (float, 0.125),
        ("fd", "h"): (float, 1e-6),
    },
}

# flag dest -> (section, key)
_FLAGS = {
    "n": ("run", "n"), "s": ("run", "s"), "lam": ("run", "lam"), "problems": ("run", "problems"),
    "problem": ("run", "problem"), "scales": ("run", "scales"), "tau": ("run", "tau"),
    "points": ("run", "points"), "x0_scale": ("run", "x0_scale"), "with_run": ("run", "with_run"),
    "algorithm": ("run", "algorithm"), "seeds": ("run", "seeds"), "budget_mult": ("run", "budget_mult"),
    "jobs": ("run", "jobs"), "plots": ("run", "plots"),
    "s0": ("zoro-fa", "s0"), "sigma0": ("zoro-fa", "sigma0"), "eps": ("zoro-fa", "eps"),
    "theta": ("zoro-fa", "theta"), "b": ("zoro-fa", "b"), "s0_policy": ("zoro-fa", "s0_policy"),
    "zoro_s": ("zoro", "s"), "zoro_step": ("zoro", "step"), "zoro_h": ("zoro", "h"),
    "zoro_b": ("zoro", "b"), "zoro_iterations": ("zoro", "iterations"),
    "fd_step": ("fd", "step"), "fd_h": ("fd", "h"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [run], [zoro-fa], [zoro], [fd] sections")
    common.add_argument("--out", help="output directory (default: $ZOROFA_OUT or results/<command>)")
    common.add_argument("--seed", type=int, help="single seed (shorthand for --seeds)")
    common.add_argument("--seeds", help="comma-separated seeds")
    common.add_argument("--budget-mult", dest="budget_mult", type=float,
                        help="query budget per run in units of n+1")
    common.add_argument("--jobs", type=int, help="parallel runs (0 = all cores)")
    common.add_argument("--no-plots", dest="plots", action="store_const", const=False,
                        help="skip figure rendering")
    common.add_argument("-v", "--verbose", action="store_true")

    fa = argparse.ArgumentParser(add_help=False)
    g = fa.add_argument_group("ZORO-FA")
    g.add_argument("--s0", help="initial sparsity: integer or '<frac>n'")
    g.add_argument("--sigma0", help="initial sigma: number or 'auto' for 1/(s0 ln n)")
    g.add_argument("--eps", type=float)
    g.add_argument("--theta", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--s0-policy", dest="s0_policy", choices=("fd", "clamp", "run"),
                   help="handling of s0 with ceil(b s0 ln n) > n/4")

    zo = argparse.ArgumentParser(add_help=False)
    g = zo.add_argument_group("ZORO baseline")
    g.add_argument("--zoro-s", dest="zoro_s", help="integer, '<frac>n' or 'exact'")
    g.add_argument("--zoro-step", dest="zoro_step", help="number or 'auto' for 0.005/(s ln n)")
    g.add_argument("--zoro-h", dest="zoro_h", type=float)
    g.add_argument("--zoro-b", dest="zoro_b", type=float)
    g.add_argument("--zoro-iterations", dest="zoro_iterations", type=int)

    p = argparse.ArgumentParser(prog="zorofa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sparse-bench", parents=[common, fa, zo],
                        help="ZORO-FA vs ZORO on max-s-squared and the Nesterov variant")
    sp.add_argument("--n", type=int)
    sp.add_argument("--s", type=int)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--problems")

    mp = sub.add_parser("mgh-bench", parents=[common, fa, zo], help="MGH subset with data profiles")
    mp.add_argument("--n", help="comma-separated dimensions")
    mp.add_argument("--problems")
    mp.add_argument("--scales", help="comma-separated x0 scale exponents from {0,1}")
    mp.add_argument("--tau", help="comma-separated tolerances")

    gp = sub.add_parser("grad-profile", parents=[common, fa], help="sorted gradient magnitude profile")
    gp.add_argument("--problem")
    gp.add_argument("--n", type=int)
    gp.add_argument("--points", type=int)
    gp.add_argument("--x0-scale", dest="x0_scale", type=int)
    gp.add_argument("--with-run", dest="with_run", action="store_const", const=True,
                    help="also run ZORO-FA and emit the s_k / f series")

    sr = sub.add_parser("single-run", parents=[common, fa, zo], help="one optimizer on one problem")
    sr.add_argument("--problem")
    sr.add_argument("--algorithm", choices=("zoro-fa", "zoro", "fd-descent"))
    sr.add_argument("--n", type=int)
    sr.add_argument("--s", type=int)
    sr.add_argument("--lam", type=float)
    sr.add_argument("--x0-scale", dest="x0_scale", type=int)
    sr.add_argument("--fd-step", dest="fd_step", type=float)
    sr.add_argument("--fd-h", dest="fd_h", type=float)
    return p


def resolve_config(args):
    """Merge defaults, the optional config file and explicit flags into {(section, key): value}."""
    schema = SCHEMA[args.command]
    values = {k: default for k, (_, default) in schema.items()}
    if args.config:
        cp = configparser.ConfigParser(interpolation=None)
        if not cp.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        for section in cp.sections():
            for key, raw in cp.items(section):
                if section == "run" and key == "command":
                    if raw != args.command:
                        raise ConfigError(f"config is for {raw!r}, not {args.command!r}")
                    continue
                if (section, key) not in schema:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                try:
                    values[(section, key)] = schema[(section, key)][0](raw)
                except ValueError as e:
                    raise ConfigError(f"[{section}] {key}: {e}")
    if getattr(args, "seed", None) is not None:
        values[("run", "seeds")] = str(args.seed)
    for dest, target in _FLAGS.items():
        v = getattr(args, dest, None)
        if v is not None and target in schema:
            values[target] = schema[target][0](v) if not isinstance(v, bool) else v
    return values


def write_resolved(values, command, path):
    cp = configparser.ConfigParser(interpolation=None)
    cp["run"] = {"command": command}
    for (section, key), v in sorted(values.items()):
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = repr(v) if isinstance(v, float) else str(v).lower() if isinstance(v, bool) else str(v)
    with open(path, "w") as fh:
        cp.write(fh)


# --- parameter parsing ------------------------------------------------------------


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _names(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _sparsity_rule(text, exact=None):
    """'20' -> 20, '0.1n' -> partial(s0_fraction, frac=0.1), 'exact' -> exact."""
    t = str(text).strip()
    if t == "exact":
        if exact is None:
            raise ConfigError("'exact' sparsity only applies to sparse benchmarks")
        return exact
    if t.endswith("n"):
        return functools.partial(bench.s0_fraction, frac=float(t[:-1] or 1.0))
    return int(t)


def _frac_of(rule):
    return rule.keywords["frac"] if isinstance(rule, functools.partial) else None


def _fixed_inverse_log(n, s0, scale=1.0):
    return scale / (s0 * math.log(n))


def _scaled_rule(text, s_rule, scale):
    """'auto' -> scale / (s ln n) with s from s_rule; anything else is a fixed number."""
    t = str(text).strip()
    if t != "auto":
        return float(t)
    frac = _frac_of(s_rule)
    if frac is not None:
        if scale == 1.0:
            return functools.partial(bench.sigma0_inverse_log, frac=frac)
        return functools.partial(bench.step_inverse_log, scale=scale, frac=frac)
    return functools.partial(_fixed_inverse_log, s0=int(s_rule), scale=scale)


def zoro_fa_solver(values):
    s0 = _sparsity_rule(values[("zoro-fa", "s0")])
    sigma0 = _scaled_rule(values[("zoro-fa", "sigma0")], s0, 1.0)
    policy = values[("zoro-fa", "s0_policy")]
    if policy not in ("fd", "clamp", "run"):
        raise ConfigError(f"s0_policy must be fd, clamp or run, got {policy!r}")
    return bench.Solver("zoro-fa", "zoro-fa", (
        ("s0", s0), ("sigma0", sigma0), ("b", values[("zoro-fa", "b")]),
        ("theta", values[("zoro-fa", "theta")]), ("eps", values[("zoro-fa", "eps")]),
        ("infeasible_s0", policy),
    ))


def zoro_solver(values, exact=None):
    s = _sparsity_rule(values[("zoro", "s")], exact)
    step = _scaled_rule(values[("zoro", "step")], s, 0.005)
    return bench.Solver("zoro", "zoro", (
        ("s", s), ("step_size", step), ("h", values[("zoro", "h")]),
        ("b", values[("zoro", "b")]), ("iterations", values[("zoro", "iterations")]),
    ))


def fd_solver(values):
    return bench.Solver("fd-descent", "fd-descent", (
        ("step_size", values[("fd", "step")]), ("h", values[("fd", "h")]),
    ))


def _jobs(values):
    j = values[("run", "jobs")]
    return j if j > 0 else (os.cpu_count() or 1)


def _check_problem(name, n, **kw):
    if name not in PROBLEM_NAMES:
        raise ConfigError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    try:
        get_problem(name, n, **kw)
    except (IncompatibleDimension, ValueError) as e:
        raise ConfigError(str(e))


# --- commands ------------------------------------------------------------------------


def cmd_sparse_bench(values, out):
    n, s, lam = values[("run", "n")], values[("run", "s")], values[("run", "lam")]
    names = _names(values[("run", "problems")])
    for name in names:
        if name not in ("max_s_squared", "nesterov_worst"):
            raise ConfigError(f"sparse-bench runs max_s_squared / nesterov_worst, not {name!r}")
        _check_problem(name, n, s=s, lam=lam)
    problems = [bench.ProblemSpec(name, n, (("s", s), ("lam", lam))) for name in names]
    solvers = [zoro_fa_solver(values), zoro_solver(values, exact=s)]
    seeds = _ints(values[("run", "seeds")])
    results = bench.run_suite(problems, solvers, seeds, values[("run", "budget_mult")], _jobs(values))
    bench.write_trajectory_csv(results, out / "trajectories.csv")
    if values[("run", "plots")]:
        from . import plotting
        for name in names:
            plotting.plot_trajectories([r for r in results if r.problem == name],
                                       out / f"fig_trajectories_{name}.png", title=f"{name}, n={n}")
    return results


def cmd_mgh_bench(values, out):
    dims = _ints(values[("run", "n")])
    names = _names(values[("run", "problems")])
    scales = _ints(values[("run", "scales")])
    taus = _floats(values[("run", "tau")])
    if any(sc not in (0, 1) for sc in scales):
        raise ConfigError("scales must come from {0, 1}")
    problems = []
    for n in dims:
        for name in names:
            if name not in MGH_NAMES:
                raise ConfigError(f"unknown MGH problem {name!r}; choose from {', '.join(MGH_NAMES)}")
            for sc in scales:
                try:
                    problems.append(get_problem(name, n, x0_scale=sc))
                except IncompatibleDimension as e:
                    raise ConfigError(str(e))
    solvers = [zoro_fa_solver(values), zoro_solver(values)]
    seeds = _ints(values[("run", "seeds")])
    results = bench.run_suite(problems, solvers, seeds, values[("run", "budget_mult")], _jobs(values))
    bench.write_trajectory_csv(results, out / "trajectories.csv")
    profiles = [bench.data_profile(results, t) for t in taus]
    bench.write_profile_csv(profiles, out / "profiles.csv")
    per_n = {}
    for n in dims:
        sub = [r for r in results if r.n == n]
        per_n[n] = [bench.data_profile(sub, t) for t in taus]
        bench.write_profile_csv(per_n[n], out / f"profiles_n{n}.csv")
    if values[("run", "plots")]:
        from . import plotting
        for n, profs in per_n.items():
            plotting.plot_data_profiles(profs, out / f"fig_profiles_n{n}.png",
                                        alpha_max=values[("run", "budget_mult")])
    return results


def cmd_grad_profile(values, out):
    name, n = values[("run", "problem")], values[("run", "n")]
    _check_problem(name, n)
    seeds = _ints(values[("run", "seeds")])
    problem = get_problem(name, n, x0_scale=values[("run", "x0_scale")], seed=seeds[0])
    prof = bench.compressibility_profile(problem, values[("run", "points")], seeds[0])
    bench.write_compressibility_csv([prof], out / "compressibility.csv")
    results = []
    if values[("run", "with_run")]:
        results = bench.run_suite([problem], [zoro_fa_solver(values)], seeds,
                                  values[("run", "budget_mult")], 1)
        bench.write_trajectory_csv(results, out / "trajectories.csv")
    if values[("run", "plots")]:
        from . import plotting
        plotting.plot_compressibility(prof, out / f"fig_compressibility_{problem.name}.png")
        for r in results:
            if r.trajectory is not None:
                plotting.plot_sparsity_objective(r.trajectory, out / f"fig_sparsity_{r.problem}_seed{r.seed}.png",
                                                 title=f"{r.problem}, n={n}")
    return results


def cmd_single_run(values, out):
    name, n = values[("run", "problem")], values[("run", "n")]
    kw = dict(s=values[("run", "s")], lam=values[("run", "lam")], x0_scale=values[("run", "x0_scale")])
    _check_problem(name, n, **kw)
    algorithm = values[("run", "algorithm")]
    exact = values[("run", "s")] if name in ("max_s_squared", "nesterov_worst") else None
    if algorithm == "zoro-fa":
        solver = zoro_fa_solver(values)
    elif algorithm == "zoro":
        solver = zoro_solver(values, exact=exact)
    elif algorithm == "fd-descent":
        solver = fd_solver(values)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    problem = bench.ProblemSpec(name, n, tuple(sorted(kw.items())))
    seeds = _ints(values[("run", "seeds")])
    results = bench.run_suite([problem], [solver], seeds, values[("run", "budget_mult")], 1)
    bench.write_trajectory_csv(results, out / "trajectories.csv")
    for r in results:
        if r.error:
            raise RuntimeError(r.error)
        log.info("%s seed=%d: f0=%.6g f_final=%.6g queries=%d (%s)", r.problem, r.seed,
                 r.trajectory.f0, r.trajectory.f_final, r.trajectory.queries, r.trajectory.termination)
    if values[("run", "plots")]:
        from . import plotting
        plotting.plot_trajectories(results, out / f"fig_trajectories_{name}.png", title=f"{name}, n={n}")
    return results


HANDLERS = {
    "sparse-bench": cmd_sparse_bench,
    "mgh-bench": cmd_mgh_bench,
    "grad-profile": cmd_grad_profile,
    "single-run": cmd_single_run,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = resolve_config(args)
        out = Path(args.out or os.environ.get("ZOROFA_OUT") or Path("results") / args.command)
        out.mkdir(parents=True, exist_ok=True)
        write_resolved(values, args.command, out / "resolved-config.ini")
        results = HANDLERS[args.command](values, out)
    except (ConfigError, UnknownProblem) as e:
        print(f"zorofa: config error: {e}", file=sys.stderr)
        return 2
    except (ZorofaError, RuntimeError, OSError) as e:
        print(f"zorofa: {e}", file=sys.stderr)
        return 1
    failed = [r for r in results if r.error]
    if failed:
        print(f"zorofa: {len(failed)} run(s) failed", file=sys.stderr)
        return 1
    print(f"wrote outputs to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
