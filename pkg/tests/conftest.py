import functools

import numpy as np
import pytest

import zorofa
import zorofa.bench
import zorofa.optimizers
from invariants import TALLY, check_plain_descent, check_zoro_fa
from zorofa.oracle import CountingOracle

_raw_zoro_fa = zorofa.optimizers.zoro_fa


@functools.wraps(_raw_zoro_fa)
def _checked_zoro_fa(problem, config, oracle=None, diagnostics=True):
    own = oracle is None
    if own:
        oracle = CountingOracle(problem.objective, config.budget)
    before = oracle.count
    traj = _raw_zoro_fa(problem, config, oracle=oracle, diagnostics=diagnostics)
    check_zoro_fa(traj, config, problem.dim, config.budget if own else None)
    _reconcile(oracle, before, traj)
    return traj


def _reconcile(oracle, before, traj):
    if oracle.count - before != traj.queries:
        TALLY["accounting_violations"] += 1
        raise AssertionError(f"oracle counted {oracle.count - before}, trajectory says {traj.queries}")


def _checked_baseline(raw, budget_pos):
    @functools.wraps(raw)
    def run(problem, *args, oracle=None, **kwargs):
        budget = kwargs["budget"] if "budget" in kwargs else args[budget_pos]
        if oracle is None:
            oracle = CountingOracle(problem.objective, budget)
        before = oracle.count
        traj = raw(problem, *args, oracle=oracle, **kwargs)
        check_plain_descent(traj)
        _reconcile(oracle, before, traj)
        return traj
    return run


_checked_zoro_fixed = _checked_baseline(zorofa.optimizers.zoro_fixed, 4)
_checked_fd_descent = _checked_baseline(zorofa.optimizers.fd_descent, 2)


# Every ZORO-FA run in the suite, including those made through bench and the CLI,
# goes through the invariant checker.
zorofa.optimizers.zoro_fa = _checked_zoro_fa
zorofa.bench.zoro_fa = _checked_zoro_fa
zorofa.zoro_fa = _checked_zoro_fa
for _mod in (zorofa.optimizers, zorofa.bench, zorofa):
    _mod.zoro_fixed = _checked_zoro_fixed
    _mod.fd_descent = _checked_fd_descent


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def invariant_tally():
    return TALLY


ACCEPTANCE = []  # (criterion, passed, detail) lines recorded by test_acceptance


def pytest_collection_modifyitems(items):
    # The suite-wide invariant criteria read the tally, so they run after everything else.
    last = [i for i in items if i.get_closest_marker("suite_tally")]
    rest = [i for i in items if not i.get_closest_marker("suite_tally")]
    items[:] = rest + last


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
