"""Brute-force oracles for the test suite.

Everything here recomputes quantities from first principles (forward
enumeration, direct simulation, exhaustive summation) without importing the
closed forms under test, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math

import numpy as np

# The standard verification grid used across tests and acceptance:
# (num_states, r) shapes crossed with channel qualities.
GRID_SHAPES = ((2, 0.1), (3, 0.3), (8, 0.1), (10, 0.05))
GRID_RHOS = (0.3, 0.4, 0.5, 0.7, 1.0)


def belief_after(p: float, r: float, k: int) -> float:
    """Belief k slots after a delivery, by iterating the affine update."""
    v = 1.0
    for _ in range(k):
        v = p * v + r * (1.0 - v)
    return v


def incorrectness_pmf_by_enumeration(p: float, r: float, j: int) -> np.ndarray:
    """Distribution of the incorrectness age j slots after a delivery.

    Forward dynamic programming on the match/mismatch chain relative to the
    delivered sample: from a match the source holds with probability p;
    from a mismatch it returns to the estimated state with probability r.
    Never references the belief sequence or any closed form.
    """
    dist = {0: 1.0}
    for _ in range(j):
        new: dict[int, float] = {}
        for age, mass in dist.items():
            if age == 0:
                new[0] = new.get(0, 0.0) + mass * p
                new[1] = new.get(1, 0.0) + mass * (1.0 - p)
            else:
                new[0] = new.get(0, 0.0) + mass * r
                new[age + 1] = new.get(age + 1, 0.0) + mass * (1.0 - r)
        dist = new
    out = np.zeros(j + 1)
    for age, mass in dist.items():
        out[age] = mass
    return out


def ladder_value_by_enumeration(p: float, r: float, j: int) -> float:
    """Mean of the enumerated incorrectness-age distribution."""
    pmf = incorrectness_pmf_by_enumeration(p, r, j)
    return float(np.dot(np.arange(j + 1), pmf))


def simulate_threshold_chain(rho: float, n: int, slots: int, seed: int) -> np.ndarray:
    """Empirical state occupancy of the single-user threshold chain.

    Transmit whenever the clock j >= n; a success (probability rho) resets
    to 1, anything else steps to j+1. Returns visit frequencies indexed by
    state (entry 0 unused).
    """
    rng = np.random.default_rng(seed)
    u = rng.random(slots)
    counts: dict[int, int] = {}
    j = 1
    for t in range(slots):
        counts[j] = counts.get(j, 0) + 1
        if j >= n and u[t] < rho:
            j = 1
        else:
            j += 1
    out = np.zeros(max(counts) + 1)
    for state, c in counts.items():
        out[state] = c / slots
    return out


def weighted_average_by_summation(
    rho: float, n: int, state_value, j_cut: int
) -> float:
    """sum_j u^n(j) * value(j) with the stationary weights written out."""
    terms = []
    base = rho / (n * rho + 1.0 - rho)
    for j in range(1, j_cut + 1):
        w = base if j <= n else base * (1.0 - rho) ** (j - n)
        terms.append(w * state_value(j))
    return math.fsum(terms)
