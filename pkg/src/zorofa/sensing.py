"""Rademacher directions, sensing matrices and finite-difference measurements."""
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DomainError, TooManyRows


class RademacherBank:
    """n sign vectors in R^n, fixed once per optimizer run.

    Row i is drawn from its own stream keyed on ``(seed, i)``, so the lazy
    mode (``eager=False``) regenerates exactly the rows the eager mode stores.
    """

    def __init__(self, n, seed, eager=True):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = int(n)
        self.seed = int(seed)
        self.eager = eager
        self._signs = None
        if eager:
            self._signs = np.stack([self._row(i) for i in range(self.n)])
            self._signs.setflags(write=False)

    def _row(self, i):
        bits = rng.stream(self.seed, rng.BANK, i).integers(0, 2, size=self.n, dtype=np.int8)
        return (2 * bits - 1).astype(np.int8)

    def direction(self, i):
        if not 0 <= i < self.n:
            raise IndexError(i)
        if self._signs is not None:
            return self._signs[i].astype(np.float64)
        return self._row(i).astype(np.float64)

    def signs(self, m):
        """First m directions as an (m, n) float64 array."""
        if m > self.n:
            raise TooManyRows(f"requested {m} directions from a bank of {self.n}")
        if self._signs is not None:
            return self._signs[:m].astype(np.float64)
        return np.stack([self._row(i) for i in range(m)]).astype(np.float64) if m else np.zeros((0, self.n))

    @property
    def directions(self):
        return self.signs(self.n)

    def digest(self):
        h = hashlib.sha256()
        for i in range(self.n):
            row = self._signs[i] if self._signs is not None else self._row(i)
            h.update(row.tobytes())
        return h.hexdigest()


def sample_bank(n, seed, eager=True):
    return RademacherBank(n, seed, eager=eager)


@dataclass(frozen=True)
class SensingMatrix:
    """Z = [z_1 ... z_m]^T / sqrt(m) built from the first m bank rows."""

    values: np.ndarray
    bank: RademacherBank

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def scale(self):
        return 1.0 / math.sqrt(self.rows)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def sensing_matrix(bank, m):
    if m < 1:
        raise ValueError("m must be positive")
    if m > bank.n:
        raise TooManyRows(f"m={m} exceeds n={bank.n}")
    Z = bank.signs(m) / math.sqrt(m)
    Z.setflags(write=False)
    return SensingMatrix(Z, bank)


def measure(oracle, x, h, m, bank, f_x):
    """Scaled forward differences y_i = (f(x + h z_i) - f(x)) / (sqrt(m) h).

    Uses the unscaled sign vectors z_i and exactly m oracle calls; ``f_x`` is
    the caller's cached f(x).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if m > bank.n:
        raise TooManyRows(f"m={m} exceeds n={bank.n}")
    x = np.asarray(x, dtype=np.float64)
    denom = math.sqrt(m) * h
    y = np.empty(m)
    for i in range(m):
        y[i] = (oracle(x + h * bank.direction(i)) - f_x) / denom
    return y


# --- RIP-related constants -----------------------------------------------------


def c0(a):
    return a * a / 4.0 - a ** 3 / 6.0


def _log_ratio_term(delta, n, s):
    if n <= 4 * s:
        raise DomainError(f"need n > 4s, got n={n}, s={s}")
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    return 1.0 + (1.0 + math.log(12.0 / delta)) / math.log(n / (4.0 * s))


def c1(delta, n, s):
    """Smallest oversampling factor b for which the 4s-RIP bound with constant delta applies."""
    return 4.0 * _log_ratio_term(delta, n, s) / c0(delta / 2.0)


def gamma(delta, b, n, s):
    """Exponent rate of the RIP failure probability 2 exp(-gamma m)."""
    if b <= 0:
        raise DomainError("b must be positive")
    return c0(delta / 2.0) - 4.0 / b * _log_ratio_term(delta, n, s)


@dataclass(frozen=True)
class RipEstimate:
    s: int
    delta: float
    trials: int


def empirical_rip_check(Z, s, trials, seed):
    """Lower-bound witness for the 4s restricted isometry constant of Z.

    Draws random 4s-sparse unit vectors (uniform support, Gaussian values) and
    reports the largest observed | ||Zv||^2 - 1 |.
    """
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[1]
    k = 4 * s
    if k > n:
        raise DomainError(f"need 4s <= n, got s={s}, n={n}")
    g = rng.stream(seed, rng.RIP)
    worst = 0.0
    for _ in range(trials):
        support = g.choice(n, size=k, replace=False)
        vals = g.standard_normal(k)
        vals /= np.linalg.norm(vals)
        energy = np.linalg.norm(Z[:, support] @ vals) ** 2
        worst = max(worst, abs(energy - 1.0))
    return RipEstimate(s=s, delta=worst, trials=trials)
