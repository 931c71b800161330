"""Symmetric Markov source parameters and monitor-side belief propagation.

A source holds one of ``num_states`` values; each slot it stays put with
probability ``p`` and hops to any one specific other state with probability
``r``, so p + (num_states-1)*r = 1. Updates reach the monitor through a
channel that succeeds with probability ``rho`` per attempt.

The monitor tracks a belief pi(t) = P(estimate == true state). On a
successful delivery the belief resets to p; otherwise it contracts toward
the uniform value 1/N under an affine map. The deterministic sequence
``pi_k`` gives the belief exactly k slots after a delivery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from maoii.errors import ConstraintViolated, RangeError, RegimeViolated

# Tolerance for accepting p + (N-1)r = 1 at construction; accepted values
# are renormalized so downstream closed forms see the identity exactly.
EQ_CONSTRAINT_TOL = 1e-9
# The renormalized p may land a few ulp below r at the p = r boundary
# (e.g. r = 0.2, N = 5); treat that as the boundary, not a regime breach.
REGIME_SLACK = 1e-12


@dataclass(frozen=True)
class SourceParams:
    """Validated (p, r, num_states, rho) tuple for one source/channel pair."""

    p: float
    r: float
    num_states: int
    rho: float

    @property
    def nr(self) -> float:
        """N*r = 1 + r - p, the denominator of every ladder closed form."""
        return self.num_states * self.r

    @property
    def contraction(self) -> float:
        """p - r = 1 - N*r, the per-slot contraction factor of the belief."""
        return self.p - self.r


def make_params(
    p: float | None = None,
    r: float | None = None,
    num_states: int = 2,
    rho: float = 1.0,
) -> SourceParams:
    """Build validated SourceParams; either p or r may be derived.

    Exactly one of ``p``/``r`` may be omitted and is then computed from
    p + (num_states-1)*r = 1. When both are given they must satisfy the
    identity within 1e-9; p is then recomputed from r so the identity
    holds exactly.

    Raises RangeError for out-of-range values, ConstraintViolated when the
    identity fails beyond tolerance and RegimeViolated when p < r.
    """
    if not isinstance(num_states, int) or isinstance(num_states, bool):
        raise RangeError(f"num_states must be an integer, got {num_states!r}")
    if num_states < 2:
        raise RangeError(f"num_states must be >= 2, got {num_states}")
    if not math.isfinite(rho) or not 0.0 < rho <= 1.0:
        raise RangeError(f"rho must lie in (0, 1], got {rho}")

    if p is None and r is None:
        raise RangeError("one of p or r must be given")
    if r is None:
        if not math.isfinite(p):
            raise RangeError(f"p must be finite, got {p}")
        r = (1.0 - p) / (num_states - 1)
    elif p is not None:
        if not (math.isfinite(p) and math.isfinite(r)):
            raise RangeError(f"p and r must be finite, got p={p}, r={r}")
        gap = p + (num_states - 1) * r - 1.0
        if abs(gap) > EQ_CONSTRAINT_TOL:
            raise ConstraintViolated(
                f"p + (num_states-1)*r = {p + (num_states - 1) * r!r}, must equal 1"
            )
    if not math.isfinite(r) or r < 0.0:
        raise RangeError(f"r must be a probability >= 0, got {r}")
    # Renormalize: keep r, derive p, so 1 + r - p == num_states*r exactly.
    p = 1.0 - (num_states - 1) * r
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"derived p={p} is not a probability (r={r}, N={num_states})")
    if p < r:
        raise RegimeViolated(f"p={p} < r={r}: sources must be sticky (p >= r)")
    return SourceParams(p=p, r=r, num_states=num_states, rho=rho)


@dataclass(frozen=True)
class Belief:
    """P(monitor estimate == true source state).

    The constructor accepts any probability; trajectories started from a
    delivery (pi = 1) stay inside [1/num_states, 1].
    """

    pi: float

    def __post_init__(self):
        if not math.isfinite(self.pi) or not 0.0 <= self.pi <= 1.0:
            raise RangeError(f"belief must lie in [0, 1], got {self.pi}")


def belief_update(params: SourceParams, belief: Belief, updated: bool) -> Belief:
    """One slot of belief propagation.

    ``updated`` means the user was scheduled AND the channel succeeded, in
    which case the belief resets to p. Otherwise the estimate is unchanged
    and the belief follows pi*p + r*(1-pi).
    """
    if updated:
        return Belief(params.p)
    pi = belief.pi
    return Belief(pi * params.p + params.r * (1.0 - pi))


def pi_k(params: SourceParams, k: int) -> float:
    """Belief exactly k slots after a successful delivery (closed form).

    pi_0 = 1 and pi_k = 1/N + (1 - 1/N)(p - r)^k, the fixed point of the
    idle update being the uniform 1/N.
    """
    if k < 0:
        raise RangeError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1.0
    inv_n = 1.0 / params.num_states
    return inv_n + (1.0 - inv_n) * params.contraction**k


def pi_k_recurrence(params: SourceParams, k: int) -> float:
    """Same sequence via the defining recurrence pi_k = p*pi_{k-1} + r*(1-pi_{k-1}).

    O(k); kept as the definitional path that the closed form is tested against.
    """
    if k < 0:
        raise RangeError(f"k must be >= 0, got {k}")
    p, r = params.p, params.r
    v = 1.0
    for _ in range(k):
        v = p * v + r * (1.0 - v)
    return v
