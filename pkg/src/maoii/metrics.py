"""Age penalty ladders and their per-slot transitions.

Two penalties share the same underlying integer clock j = slots since the
last successful delivery:

* plain age: the state value is j itself, unbounded;
* expected incorrectness age: the state value is the j-th rung of a ladder
  b^1 < b^2 < ... that saturates at (N-1)/(N*r).

The ladder rung b^j is the mean of the distribution returned by
:func:`aoii_pmf`, which gives how many consecutive slots the monitor's
estimate has disagreed with a source sampled j slots ago.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from maoii.errors import DegenerateParams, RangeError
from maoii.sources import SourceParams, pi_k


class Metric(str, enum.Enum):
    """Which penalty a policy or solver operates on."""

    AOI = "aoi"
    MAOII = "maoii"


@dataclass(frozen=True)
class AoiState:
    """Plain age: j slots since the last successful delivery, value j."""

    j: int

    def __post_init__(self):
        if self.j < 1:
            raise RangeError(f"age state must be >= 1, got {self.j}")

    @property
    def value(self) -> float:
        return float(self.j)


@dataclass(frozen=True)
class MaoiiState:
    """Expected-incorrectness state: clock j plus the ladder value b^j."""

    j: int
    value: float

    def __post_init__(self):
        if self.j < 1:
            raise RangeError(f"ladder index must be >= 1, got {self.j}")


def aoii_pmf(params: SourceParams, j: int) -> np.ndarray:
    """Distribution of the incorrectness age given the last sample is j slots old.

    Returns a length j+1 probability vector over {0, ..., j}:
    P(0) = pi_j, P(k) = pi_{j-k} (1-p) (1-r)^{k-1} for 1 <= k <= j-1, and
    P(j) = (1-p)(1-r)^{j-1}. Sums to one by construction.
    """
    if j < 1:
        raise RangeError(f"j must be >= 1, got {j}")
    p, r = params.p, params.r
    out = np.empty(j + 1)
    out[0] = pi_k(params, j)
    beta_pow = 1.0  # (1-r)^(k-1)
    for k in range(1, j):
        out[k] = pi_k(params, j - k) * (1.0 - p) * beta_pow
        beta_pow *= 1.0 - r
    out[j] = (1.0 - p) * beta_pow
    return out


def maoii_value_series(params: SourceParams, j: int) -> float:
    """Ladder rung b^j by direct summation of its defining series.

    b^j = sum_{k=1}^{j} k (1-p)(1-r)^{k-1} pi_{j-k}; returns 0 for j=0.
    This is the oracle the closed form is tested against.
    """
    if j < 0:
        raise RangeError(f"j must be >= 0, got {j}")
    if j == 0:
        return 0.0
    p, r = params.p, params.r
    k = np.arange(1, j + 1, dtype=np.float64)
    beta_pow = (1.0 - r) ** (k - 1.0)
    inv_n = 1.0 / params.num_states
    pis = inv_n + (1.0 - inv_n) * params.contraction ** (j - k)
    pis[-1] = 1.0  # belief is exactly 1 at the sampling instant
    return float(np.dot(k * (1.0 - p) * beta_pow, pis))


def maoii_value_closed(params: SourceParams, j: int) -> float:
    """Ladder rung b^j in closed form.

    b^j = (N-1)/(N r) + (p-r)^{j+1}/(N r) - (1-r)^{j+1}/r, with
    N r = 1 + r - p. Must match :func:`maoii_value_series` to 1e-10.
    """
    if j < 1:
        raise RangeError(f"j must be >= 1, got {j}")
    nr = params.nr
    if nr == 0.0:
        raise DegenerateParams("closed form undefined for r = 0")
    r = params.r
    q = params.contraction
    return (params.num_states - 1) / nr + q ** (j + 1) / nr - (1.0 - r) ** (j + 1) / r


def maoii_value_limit(params: SourceParams) -> float:
    """Saturation value of the ladder: b^inf = (N-1)/(N*r)."""
    if params.nr == 0.0:
        raise DegenerateParams("ladder does not saturate for r = 0")
    return (params.num_states - 1) / params.nr


DEFAULT_LADDER_LEN = 1000


@dataclass(frozen=True)
class MaoiiLadder:
    """Precomputed rungs b^1..b^{j_max}; immutable and freely shareable.

    Lookups beyond j_max saturate at b^{j_max}, which is within the
    geometric tail (1-r)^{j_max} of the true value.
    """

    params: SourceParams
    values: np.ndarray = field(repr=False)  # values[j] = b^j, values[0] = 0
    j_max: int = DEFAULT_LADDER_LEN

    @classmethod
    def build(cls, params: SourceParams, j_max: int = DEFAULT_LADDER_LEN) -> "MaoiiLadder":
        if j_max < 1:
            raise RangeError(f"j_max must be >= 1, got {j_max}")
        p, r = params.p, params.r
        # b = f * pi (discrete convolution), f[k] = k(1-p)(1-r)^(k-1)
        k = np.arange(j_max + 1, dtype=np.float64)
        beta_pow = np.concatenate(([0.0, 1.0], np.cumprod(np.full(j_max - 1, 1.0 - r))))
        f = k * (1.0 - p) * beta_pow
        inv_n = 1.0 / params.num_states
        pis = inv_n + (1.0 - inv_n) * params.contraction ** k
        pis[0] = 1.0
        values = np.convolve(f, pis)[: j_max + 1]
        values.setflags(write=False)
        return cls(params=params, values=values, j_max=j_max)

    def value(self, j: int) -> float:
        """b^j with saturation beyond j_max."""
        if j < 0:
            raise RangeError(f"j must be >= 0, got {j}")
        return float(self.values[min(j, self.j_max)])


_LADDER_CACHE: dict[tuple[SourceParams, int], MaoiiLadder] = {}


def get_ladder(params: SourceParams, j_max: int = DEFAULT_LADDER_LEN) -> MaoiiLadder:
    """Memoized ladder lookup; construction is single-writer per key."""
    key = (params, j_max)
    ladder = _LADDER_CACHE.get(key)
    if ladder is None:
        ladder = MaoiiLadder.build(params, j_max)
        _LADDER_CACHE[key] = ladder
    return ladder


def aoi_transition(state: AoiState, scheduled: bool, success: bool) -> AoiState:
    """Age resets to 1 on a delivered update, else grows by one."""
    if scheduled and success:
        return AoiState(1)
    return AoiState(state.j + 1)


def maoii_transition(
    ladder: MaoiiLadder, state: MaoiiState, scheduled: bool, success: bool
) -> MaoiiState:
    """Ladder clock resets to 1 on a delivered update (value b^1 = 1-p), else steps up."""
    j = 1 if (scheduled and success) else state.j + 1
    return MaoiiState(j=j, value=ladder.value(j))
