import numpy as np
import pytest

from zorofa.errors import BudgetExhausted, DimensionMismatch
from zorofa.oracle import CountingOracle, Objective, as_vector, evaluate, query_count, reset


def sq(x):
    return float(np.dot(x, x))


@pytest.fixture
def oracle():
    return CountingOracle(Objective(2, sq))


def test_evaluate_zero_vector(oracle):
    assert evaluate(oracle, np.zeros(2)) == 0.0
    assert query_count(oracle) == 1


def test_evaluate_three_four(oracle):
    assert evaluate(oracle, [3.0, 4.0]) == 25.0


def test_budget_boundary():
    o = CountingOracle(Objective(2, sq), budget=1)
    o(np.zeros(2))
    with pytest.raises(BudgetExhausted):
        o(np.zeros(2))
    assert o.count == 1


def test_dimension_mismatch(oracle):
    with pytest.raises(DimensionMismatch):
        oracle(np.zeros(3))
    assert oracle.count == 0


def test_query_count_and_reset(oracle):
    assert query_count(oracle) == 0
    for _ in range(3):
        oracle(np.ones(2))
    assert query_count(oracle) == query_count(oracle) == 3
    reset(oracle)
    assert query_count(oracle) == 0


def test_reset_keeps_budget_and_is_idempotent():
    o = CountingOracle(Objective(2, sq), budget=100)
    for _ in range(5):
        o(np.ones(2))
    o.reset()
    o.reset()
    assert o.count == 0 and o.budget == 100


def test_as_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(DimensionMismatch):
        as_vector([1.0, 2.0], dim=3)
    assert as_vector([1, 2]).dtype == np.float64
