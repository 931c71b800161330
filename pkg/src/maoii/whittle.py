"""Closed-form Whittle indices for both penalties, with an intersection oracle.

The index of ladder state n is the transmission charge at which the
threshold-n and threshold-(n+1) policies cost the same:

    W(n) = (avg_penalty(n+1) - avg_penalty(n)) / (active_time(n) - active_time(n+1))

Because the intersection points increase with n, they coincide with the
minimal charge making each state passive, which is the index proper. The
closed forms below are regression-tested against the series-backed
intersection ratio; a table entry that disagrees beyond tolerance is
replaced by the oracle value and recorded as an errata event, never
silently accepted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from maoii.errors import DegenerateParams, MonotonicityViolation, RangeError
from maoii.metrics import Metric
from maoii.policy_eval import avg_active_time, avg_penalty_series
from maoii.sources import SourceParams

ORACLE_TOL = 1e-8
# Index increments decay geometrically while the index itself tends to a
# constant, so float noise makes consecutive entries equal-to-rounding at
# large n; monotonicity is enforced up to this slack.
MONO_SLACK = 1e-9


def whittle_aoi(rho: float, n: int) -> float:
    """Index of plain-age state n: n(n-1)rho/2 + n."""
    if n < 1:
        raise RangeError(f"state must be >= 1, got {n}")
    return n * (n - 1) * rho / 2.0 + n


def whittle_maoii(params: SourceParams, n: int) -> float:
    """Index of ladder state n (closed form).

    With q = p-r = 1-Nr, beta = 1-r and g = 1-rho:

        W(n) = rho*beta^2/r^2 - rho*q^2/(Nr)^2
             + q^{n+2} (n*rho + 1 + rho*q/(Nr)) * rho/(Nr (1 - g q))
             - beta^{n+2} (n*rho + 1 + rho*beta/r) * rho/(r (1 - g beta))

    The two tail factors carry distinct denominators, mirroring the two
    geometric tails of the threshold-average closed form.
    """
    if n < 1:
        raise RangeError(f"state must be >= 1, got {n}")
    nr = params.nr
    r = params.r
    if nr == 0.0:
        raise DegenerateParams("index undefined for r = 0")
    rho = params.rho
    q = params.contraction
    beta = 1.0 - r
    g = 1.0 - rho
    head = rho * beta**2 / r**2 - rho * q**2 / nr**2
    q_term = q ** (n + 2) * (n * rho + 1.0 + rho * q / nr) * (rho / (nr * (1.0 - g * q)))
    b_term = beta ** (n + 2) * (n * rho + 1.0 + rho * beta / r) * (rho / (r * (1.0 - g * beta)))
    return head + q_term - b_term


def whittle_intersection_oracle(
    params: SourceParams, n: int, metric: Metric | str, tol: float = 1e-13
) -> float:
    """Index of state n as the cost-line intersection ratio, series-backed.

    Uses the truncated-series penalty averages (authoritative) and the
    active-time closed form. The denominator is strictly positive because
    the active time strictly decreases with the threshold.
    """
    if n < 1:
        raise RangeError(f"state must be >= 1, got {n}")
    metric = Metric(metric)
    m_hi = avg_penalty_series(params, n + 1, metric, tol)
    m_lo = avg_penalty_series(params, n, metric, tol)
    d_lo = avg_active_time(params.rho, n)
    d_hi = avg_active_time(params.rho, n + 1)
    return (m_hi - m_lo) / (d_lo - d_hi)


@dataclass(frozen=True)
class ErrataEvent:
    """A closed-form table entry rejected in favor of the oracle value."""

    metric: Metric
    n: int
    closed_value: float
    oracle_value: float

    @property
    def deviation(self) -> float:
        return abs(self.closed_value - self.oracle_value)


@dataclass(frozen=True)
class WhittleTable:
    """Indices W(1)..W(n_max) for one metric; immutable after construction."""

    params: SourceParams
    metric: Metric
    indices: np.ndarray = field(repr=False)
    n_max: int
    errata: tuple[ErrataEvent, ...] = ()

    def value(self, n: int) -> float:
        """W(n), saturating at W(n_max)."""
        if n < 1:
            raise RangeError(f"state must be >= 1, got {n}")
        return float(self.indices[min(n, self.n_max) - 1])

    def lookup(self, j: int) -> tuple[float, bool]:
        """Saturating lookup for schedulers: (value, overflowed)."""
        if j <= self.n_max:
            return float(self.indices[j - 1]), False
        return float(self.indices[self.n_max - 1]), True


def _closed_form(params: SourceParams, metric: Metric, n: int) -> float:
    if metric is Metric.AOI:
        return whittle_aoi(params.rho, n)
    return whittle_maoii(params, n)


def build_table(
    params: SourceParams,
    metric: Metric | str,
    n_max: int,
    validate: bool = True,
    oracle_tol: float = ORACLE_TOL,
) -> WhittleTable:
    """Closed-form index table, optionally cross-checked entry by entry.

    With ``validate`` the intersection oracle is evaluated at every n; a
    disagreement beyond ``oracle_tol`` swaps in the oracle value and files
    an errata event on the table. Construction fails with
    MonotonicityViolation at the first decreasing entry.
    """
    if n_max < 1:
        raise RangeError(f"n_max must be >= 1, got {n_max}")
    metric = Metric(metric)
    indices = np.array([_closed_form(params, metric, n) for n in range(1, n_max + 1)])
    errata: list[ErrataEvent] = []
    if validate:
        for n in range(1, n_max + 1):
            oracle = whittle_intersection_oracle(params, n, metric)
            if abs(indices[n - 1] - oracle) > oracle_tol:
                errata.append(
                    ErrataEvent(metric=metric, n=n, closed_value=float(indices[n - 1]),
                                oracle_value=oracle)
                )
                indices[n - 1] = oracle
    scale = np.maximum(1.0, np.abs(indices[:-1])) if n_max > 1 else np.empty(0)
    diffs = np.diff(indices)
    bad = np.nonzero(diffs < -MONO_SLACK * scale)[0]
    if bad.size:
        raise MonotonicityViolation(int(bad[0]) + 1)
    indices.setflags(write=False)
    return WhittleTable(
        params=params, metric=metric, indices=indices, n_max=n_max, errata=tuple(errata)
    )


_TABLE_CACHE: dict[tuple[SourceParams, Metric, int], WhittleTable] = {}


def get_table(params: SourceParams, metric: Metric | str, n_max: int) -> WhittleTable:
    """Memoized validated table (schedulers always consume validated tables)."""
    metric = Metric(metric)
    key = (params, metric, n_max)
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = build_table(params, metric, n_max, validate=True)
        _TABLE_CACHE[key] = table
    return table


def export_table_csv(params: SourceParams, n_max: int, path) -> None:
    """Write both index sequences side by side: columns n, W_aoi, W_maoii."""
    aoi = build_table(params, Metric.AOI, n_max, validate=False)
    maoii = build_table(params, Metric.MAOII, n_max, validate=False)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "W_aoi", "W_maoii"])
        for n in range(1, n_max + 1):
            writer.writerow([n, repr(aoi.value(n)), repr(maoii.value(n))])
