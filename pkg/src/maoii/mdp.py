"""Independent ground truth: the one-arm average-cost problem solved numerically.

For a fixed transmission charge W the single user faces an average-cost MDP
on the ladder states: idling steps the clock up deterministically at cost
m^j, transmitting costs W extra and resets the clock to 1 with probability
rho. Relative value iteration on a truncated, saturating state space
recovers the gain, the differential values and the optimal action per
state. Everything the closed-form modules claim - threshold structure,
indexability, the index values themselves - is re-derived here from the
Bellman equation alone and compared at tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from maoii.errors import (
    BracketFailure,
    NotConverged,
    NotThreshold,
    RangeError,
    TruncationError,
)
from maoii.metrics import Metric, get_ladder
from maoii.sources import SourceParams

# Damping keeps the iteration aperiodic: under rho = 1 every threshold
# policy cycles deterministically and undamped sweeps oscillate forever.
# The damped operator has the same minimizers; the gain rescales by _TAU.
_TAU = 0.5

DEFAULT_J_MAX = 1000
DEFAULT_TOL = 1e-9
DEFAULT_ITER_CAP = 200_000


@dataclass(frozen=True)
class DualMdpSpec:
    """One-arm problem instance: source, charge, metric and solver knobs."""

    params: SourceParams
    w: float
    metric: Metric = Metric.MAOII
    j_max: int = DEFAULT_J_MAX
    tol: float = DEFAULT_TOL
    iter_cap: int = DEFAULT_ITER_CAP

    def __post_init__(self):
        if self.j_max < 2:
            raise RangeError(f"j_max must be >= 2, got {self.j_max}")
        if self.tol <= 0.0:
            raise RangeError(f"tol must be > 0, got {self.tol}")
        if self.w < 0.0:
            raise RangeError(f"charge must be >= 0, got {self.w}")


@dataclass(frozen=True)
class DualSolution:
    """Converged relative-value-iteration output.

    ``v`` are differential values over states 1..j_max with v[0] (state 1)
    pinned to zero; ``transmit`` is the per-state optimal action;
    ``residual`` is the largest Bellman-equation defect, guaranteed <= tol.
    """

    spec: DualMdpSpec
    theta: float
    v: np.ndarray = field(repr=False)
    transmit: np.ndarray = field(repr=False)
    iterations: int
    residual: float


def _state_costs(spec: DualMdpSpec) -> np.ndarray:
    if spec.metric is Metric.AOI:
        return np.arange(1, spec.j_max + 1, dtype=np.float64)
    ladder = get_ladder(spec.params, j_max=spec.j_max)
    return ladder.values[1 : spec.j_max + 1].astype(np.float64)


def relative_value_iteration(spec: DualMdpSpec) -> DualSolution:
    """Solve the one-arm problem for the given charge.

    Transitions: idle moves j -> j+1 (cost m^j); transmit resets to 1 with
    probability rho, else j+1 (cost m^j + W); the top state saturates onto
    itself. Sweeps apply the damped Bellman operator, re-pin v at state 1,
    and stop once the span of successive differences meets the tolerance;
    the gain and residual are then read off the undamped equation. Ties
    between actions resolve to idle.
    """
    costs = _state_costs(spec)
    rho = spec.params.rho
    w = spec.w
    j_max = spec.j_max
    nxt = np.minimum(np.arange(1, j_max + 1), j_max - 1)

    v = np.zeros(j_max)
    span_target = _TAU * spec.tol
    iterations = 0
    while True:
        v_next = v[nxt]
        q_idle = costs + v_next
        q_act = costs + w + rho * v[0] + (1.0 - rho) * v_next
        tv = np.minimum(q_idle, q_act)
        tv_damped = (1.0 - _TAU) * v + _TAU * tv
        delta = tv_damped - v
        iterations += 1
        v = tv_damped - tv_damped[0]
        if float(delta.max() - delta.min()) < span_target:
            break
        if iterations >= spec.iter_cap:
            raise NotConverged(
                f"span {float(delta.max() - delta.min()):.3e} above target "
                f"{span_target:.3e} after {iterations} sweeps (tol/iter_cap mismatch, "
                "not a model error)"
            )

    v_next = v[nxt]
    q_idle = costs + v_next
    q_act = costs + w + rho * v[0] + (1.0 - rho) * v_next
    gain = np.minimum(q_idle, q_act) - v
    theta = 0.5 * float(gain.max() + gain.min())
    residual = 0.5 * float(gain.max() - gain.min())
    transmit = q_act < q_idle  # idle wins exact ties
    transmit.setflags(write=False)
    v.setflags(write=False)
    return DualSolution(
        spec=spec, theta=theta, v=v, transmit=transmit, iterations=iterations,
        residual=residual,
    )


def extract_threshold(solution: DualSolution) -> int:
    """Smallest transmitting state, after verifying the pattern is one cut.

    Raises NotThreshold(state) if any idle state sits at or above the first
    transmitting one - that would falsify the threshold-structure claim at
    numerical precision and must never pass silently. Raises
    TruncationError when the cut sits in the upper half of the truncated
    space, where saturation could distort it.
    """
    transmit = solution.transmit
    active = np.nonzero(transmit)[0]
    if active.size == 0:
        raise TruncationError(
            f"no transmitting state below j_max={solution.spec.j_max}; "
            "enlarge the truncation"
        )
    n = int(active[0]) + 1
    idle_above = np.nonzero(~transmit[n - 1 :])[0]
    if idle_above.size:
        raise NotThreshold(n + int(idle_above[0]))
    if n > solution.spec.j_max // 2:
        raise TruncationError(
            f"threshold {n} exceeds j_max/2 = {solution.spec.j_max // 2}; "
            "enlarge the truncation"
        )
    return n


def optimal_threshold(
    params: SourceParams,
    w: float,
    metric: Metric | str = Metric.MAOII,
    j_max: int = DEFAULT_J_MAX,
    tol: float = DEFAULT_TOL,
) -> int:
    """Convenience wrapper: solve at charge w and extract the threshold."""
    spec = DualMdpSpec(params=params, w=w, metric=Metric(metric), j_max=j_max, tol=tol)
    return extract_threshold(relative_value_iteration(spec))


_BRACKET_CAP = 64


def whittle_search(
    params: SourceParams,
    n: int,
    metric: Metric | str = Metric.MAOII,
    tol_w: float = 1e-3,
    j_max: int = DEFAULT_J_MAX,
    tol: float = DEFAULT_TOL,
) -> float:
    """Index of state n by bisection on the solver: min charge making n passive.

    State n is passive exactly when the extracted threshold exceeds n. The
    upper bracket grows geometrically from 1; BracketFailure after 64
    doublings.
    """
    if n < 1:
        raise RangeError(f"state must be >= 1, got {n}")
    metric = Metric(metric)

    def passive(w: float) -> bool:
        return optimal_threshold(params, w, metric, j_max=j_max, tol=tol) > n

    lo = 0.0
    hi = 1.0
    grew = 0
    while not passive(hi):
        lo = hi
        hi *= 2.0
        grew += 1
        if grew > _BRACKET_CAP:
            raise BracketFailure(f"no passive charge found for state {n} up to {hi}")
    while hi - lo > tol_w:
        mid = 0.5 * (lo + hi)
        if passive(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class IndexabilityReport:
    """Thresholds along a charge grid; indexable iff they never decrease."""

    params: SourceParams
    metric: Metric
    w_grid: tuple[float, ...]
    thresholds: tuple[int, ...]
    violations: tuple[int, ...]  # grid positions where the threshold dropped

    @property
    def indexable(self) -> bool:
        return not self.violations


def indexability_scan(
    params: SourceParams,
    metric: Metric | str,
    w_grid,
    j_max: int = DEFAULT_J_MAX,
    tol: float = DEFAULT_TOL,
) -> IndexabilityReport:
    """Extract thresholds along an ascending charge grid; violations are data.

    A nondecreasing threshold sequence means the passive sets are nested,
    which is the indexability property itself.
    """
    w_list = [float(w) for w in w_grid]
    if any(b < a for a, b in zip(w_list, w_list[1:])):
        raise RangeError("w_grid must be sorted ascending")
    thresholds = [
        optimal_threshold(params, w, Metric(metric), j_max=j_max, tol=tol) for w in w_list
    ]
    violations = tuple(
        i + 1 for i, (a, b) in enumerate(zip(thresholds, thresholds[1:])) if b < a
    )
    return IndexabilityReport(
        params=params,
        metric=Metric(metric),
        w_grid=tuple(w_list),
        thresholds=tuple(thresholds),
        violations=violations,
    )
