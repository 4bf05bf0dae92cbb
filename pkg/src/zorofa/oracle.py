"""Black-box objectives with exact evaluation accounting."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BudgetExhausted, DimensionMismatch


def as_vector(x, dim=None):
    """Coerce ``x`` to a finite 1-D float64 array, optionally checking its length."""
    v = np.array(x, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected a vector of length {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True)
class Objective:
    """A deterministic map R^n -> R.

    ``known_flow`` and ``known_lipschitz`` are metadata for tests and
    diagnostics only; optimizers never read them.
    """

    dim: int
    eval: Callable[[np.ndarray], float]
    known_flow: Optional[float] = None
    known_lipschitz: Optional[float] = None

    def __call__(self, x):
        return float(self.eval(x))


class CountingOracle:
    """Wraps an objective and counts every evaluation.

    With ``budget`` set, the call that would exceed it raises
    :class:`BudgetExhausted` without evaluating the objective.
    """

    def __init__(self, inner, budget=None):
        if budget is not None and budget < 1:
            raise ValueError("budget must be a positive integer")
        self.inner = inner
        self.budget = budget
        self.count = 0

    @property
    def dim(self):
        return self.inner.dim

    @property
    def exhausted(self):
        return self.budget is not None and self.count >= self.budget

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.inner.dim:
            raise DimensionMismatch(
                f"oracle dimension is {self.inner.dim}, got shape {x.shape}"
            )
        if self.exhausted:
            raise BudgetExhausted(f"budget of {self.budget} evaluations exhausted")
        self.count += 1
        return float(self.inner(x))

    __call__ = evaluate

    def query_count(self):
        return self.count

    def reset(self):
        self.count = 0

    def remaining(self):
        return None if self.budget is None else self.budget - self.count


def evaluate(oracle, x):
    return oracle.evaluate(x)


def query_count(oracle):
    return oracle.query_count()


def reset(oracle):
    oracle.reset()
