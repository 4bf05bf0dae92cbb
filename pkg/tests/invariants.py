"""Trajectory checks applied to every optimizer run in the suite."""
import math

TALLY = {"runs": 0, "accepted_steps": 0, "descent_violations": 0, "accounting_violations": 0}


def _measurements(b, s, n):
    return math.ceil(b * s * math.log(n))


def check_zoro_fa(traj, config, n, budget=None):
    """Assert the per-step invariants of a ZORO-FA trajectory; returns the trajectory."""
    TALLY["runs"] += 1
    eps = config.eps
    s0 = traj.s0
    prev_q = traj.initial_queries
    prev_f = traj.f0
    for r in traj.records:
        TALLY["accepted_steps"] += 1
        if not prev_f - r.f_after >= 0 or not r.f_before - r.f_after >= eps ** 2 / (2 * r.sigma_k):
            TALLY["descent_violations"] += 1
            raise AssertionError(f"sufficient decrease violated at k={r.k}: {r}")
        assert r.f_before == prev_f
        assert r.s_k == s0 * 2 ** r.j_k
        assert r.sigma_k == config.sigma0 * 2.0 ** r.j_k
        assert len(r.trial_sizes) == r.j_k + 1
        for j, size in enumerate(r.trial_sizes):
            m = _measurements(config.b, s0 * 2 ** j, n)
            expected = n if (traj.fd_only or m >= n) else m
            assert size == expected, (j, size, expected)
        expected_path = "FD" if (traj.fd_only or _measurements(config.b, r.s_k, n) >= n) else "CS"
        assert r.path == expected_path
        spent = r.queries_cumulative - prev_q
        if spent != sum(r.trial_sizes) + len(r.trial_sizes) or spent > (n + 1) * (r.j_k + 1) + 1:
            TALLY["accounting_violations"] += 1
            raise AssertionError(f"query accounting off at k={r.k}: spent {spent}, {r}")
        prev_q, prev_f = r.queries_cumulative, r.f_after
    if traj.queries != prev_q + traj.tail_queries:
        TALLY["accounting_violations"] += 1
        raise AssertionError(f"total {traj.queries} != {prev_q} + tail {traj.tail_queries}")
    if budget is not None and traj.termination == "BudgetExhausted":
        assert traj.queries == budget
    return traj


def check_plain_descent(traj):
    """Query reconstruction for the fixed-step baselines; returns the trajectory."""
    TALLY["runs"] += 1
    q = traj.initial_queries
    for r in traj.records:
        q += sum(r.trial_sizes) + (0 if math.isnan(r.f_after) else 1)
        if r.queries_cumulative != q:
            TALLY["accounting_violations"] += 1
            raise AssertionError(f"baseline accounting off at k={r.k}: {r.queries_cumulative} != {q}")
    if traj.queries != q + traj.tail_queries:
        TALLY["accounting_violations"] += 1
        raise AssertionError(f"baseline total {traj.queries} != {q} + tail {traj.tail_queries}")
    return traj
