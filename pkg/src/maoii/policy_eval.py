"""Exact steady-state analysis of single-user threshold policies.

A threshold policy tp(n) transmits whenever the ladder clock j >= n. Its
chain has a simple stationary law: uniform mass rho/(n*rho + 1 - rho) on
j = 1..n and a geometric tail above. From it follow closed forms for the
average penalty under either metric and for the average transmission rate.
The truncated-series evaluator is the authoritative oracle the closed
forms are regression-tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from maoii.errors import DegenerateParams, NonConvergent, RangeError
from maoii.metrics import Metric, get_ladder, maoii_value_limit
from maoii.sources import SourceParams

SERIES_TOL = 1e-12
SERIES_ITER_CAP = 1_000_000


@dataclass(frozen=True)
class ThresholdPolicy:
    """Transmit iff the current ladder clock j >= n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise RangeError(f"threshold must be >= 1, got {self.n}")


def _check_n(n: int) -> None:
    if n < 1:
        raise RangeError(f"threshold must be >= 1, got {n}")


def stationary_probability(rho: float, n: int, j: int) -> float:
    """Stationary mass of ladder state j under threshold n.

    rho/(n*rho + 1 - rho) for 1 <= j <= n, decaying by (1-rho) per state
    above; both branches coincide at j = n.
    """
    _check_n(n)
    if j < 1:
        raise RangeError(f"state must be >= 1, got {j}")
    base = rho / (n * rho + 1.0 - rho)
    if j <= n:
        return base
    return (1.0 - rho) ** (j - n) * base


def avg_active_time(rho: float, n: int) -> float:
    """Long-run transmission rate under threshold n: 1/(n*rho + 1 - rho).

    Equals the stationary mass of the transmitting states {j >= n};
    strictly decreasing in n, which is what makes the problem indexable.
    """
    _check_n(n)
    return 1.0 / (n * rho + 1.0 - rho)


def avg_aoi(rho: float, n: int) -> float:
    """Average plain age under threshold n (closed form)."""
    _check_n(n)
    num = ((n - 1) ** 2 + (n - 1)) * rho**2 + 2.0 * rho * (n - 1) + 2.0
    return num / (2.0 * rho * ((n - 1) * rho + 1.0))


def avg_maoii_closed(params: SourceParams, n: int) -> float:
    """Average ladder value under threshold n (closed form).

    Summing b^j = (N-1)/(Nr) + q^{j+1}/(Nr) - beta^{j+1}/r (q = p-r = 1-Nr,
    beta = 1-r) against the stationary law gives uniform-block partial sums
    plus two geometric tails with distinct denominators 1-(1-rho)q and
    1-(1-rho)beta.
    """
    _check_n(n)
    rho = params.rho
    nr = params.nr
    r = params.r
    if nr == 0.0:
        raise DegenerateParams("average undefined for r = 0")
    q = params.contraction
    beta = 1.0 - r
    g = 1.0 - rho
    n_states = params.num_states
    c_const = q**2 / nr**2 - beta**2 / r**2 + (n_states - 1) * g / (nr * rho)
    bracket = (
        n * (n_states - 1) / nr
        - q ** (n + 2) / nr**2
        + beta ** (n + 2) / r**2
        + g * q ** (n + 2) / (nr * (1.0 - g * q))
        - g * beta ** (n + 2) / (r * (1.0 - g * beta))
        + c_const
    )
    return rho / (n * rho + 1.0 - rho) * bracket


def _required_tail_length(rho: float, n: int, metric: Metric, tol: float, b_inf: float) -> int:
    """Smallest J >= n with the j > J remainder of the weighted series below tol."""
    if rho == 1.0:
        return n
    base = rho / (n * rho + 1.0 - rho)
    q = 1.0 - rho
    j = n
    while j - n < SERIES_ITER_CAP:
        if metric is Metric.AOI:
            # sum_{i>j} i q^{i-n} base = base q^{j+1-n}((j+1)(1-q)+q)/(1-q)^2
            tail = base * q ** (j + 1 - n) * ((j + 1) * rho + q) / rho**2
        else:
            tail = b_inf * base * q ** (j + 1 - n) / rho
        if tail < tol:
            return j
        j += 1
    raise NonConvergent(
        f"series tail bound not met within {SERIES_ITER_CAP} states (rho={rho}, n={n})"
    )


def avg_penalty_series(
    params: SourceParams,
    n: int,
    metric: Metric | str = Metric.MAOII,
    tol: float = SERIES_TOL,
) -> float:
    """Average penalty under threshold n by truncated weighted summation.

    Sums u^n(j) * m^j until the documented geometric tail bound falls below
    ``tol`` (plain age: explicit remainder of sum j*q^j; ladder: rung values
    bounded by their saturation limit). Independent of the closed forms and
    used to arbitrate them.
    """
    _check_n(n)
    if tol <= 0.0:
        raise RangeError(f"tol must be > 0, got {tol}")
    metric = Metric(metric)
    rho = params.rho
    b_inf = maoii_value_limit(params) if metric is Metric.MAOII else 0.0
    j_stop = _required_tail_length(rho, n, metric, tol, b_inf)
    if metric is Metric.MAOII:
        ladder = get_ladder(params, j_max=max(j_stop, 1))
        state_value = ladder.value
    else:
        state_value = float
    terms = []
    base = rho / (n * rho + 1.0 - rho)
    weight = base
    for j in range(1, j_stop + 1):
        if j > n:
            weight *= 1.0 - rho
        terms.append(weight * state_value(j))
    return math.fsum(terms)
