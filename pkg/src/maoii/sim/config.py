"""Experiment description and result containers for the multi-user simulator."""

from __future__ import annotations

from dataclasses import dataclass, field

from maoii.errors import ConfigError
from maoii.sources import SourceParams

POLICIES = ("wip-maoii", "wip-aoi", "round-robin", "random")
DYNAMICS = ("reduced", "ground_truth")

DEFAULT_TABLE_N_MAX = 1000
# Floor for the runaway guard on clocks/ages; the resolved cap always
# clears the horizon, since a bounded index policy may legitimately starve
# a saturated-index user for the whole run (clock <= horizon + 1).
DEFAULT_SIM_CAP = 100_000


@dataclass(frozen=True)
class ClassSpec:
    """A homogeneous group of users sharing one parameter tuple."""

    params: SourceParams
    count: int


@dataclass(frozen=True)
class SimConfig:
    """One (policy, population) experiment.

    Exactly one of ``alpha`` (channel fraction) or ``m_channels`` must be
    given; alpha maps to round(alpha * n_users), at least 1 when alpha > 0.
    """

    classes: tuple[ClassSpec, ...]
    policy: str
    horizon: int
    warmup: int
    replications: int
    seed: int
    alpha: float | None = None
    m_channels: int | None = None
    dynamics: str = "reduced"
    table_n_max: int = DEFAULT_TABLE_N_MAX
    sim_cap: int | None = None

    def __post_init__(self):
        if not self.classes:
            raise ConfigError("at least one user class is required")
        if any(c.count < 0 for c in self.classes):
            raise ConfigError("class counts must be >= 0")
        if self.n_users < 1:
            raise ConfigError("total user count must be >= 1")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}, expected one of {POLICIES}")
        if self.dynamics not in DYNAMICS:
            raise ConfigError(f"unknown dynamics {self.dynamics!r}, expected one of {DYNAMICS}")
        if self.horizon <= self.warmup:
            raise ConfigError(f"horizon {self.horizon} must exceed warmup {self.warmup}")
        if self.warmup < 0:
            raise ConfigError("warmup must be >= 0")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if (self.alpha is None) == (self.m_channels is None):
            raise ConfigError("exactly one of alpha / m_channels must be set")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.m_channels is not None and self.m_channels < 0:
            raise ConfigError("m_channels must be >= 0")

    @property
    def n_users(self) -> int:
        return sum(c.count for c in self.classes)

    def resolve_sim_cap(self) -> int:
        """Runaway guard: explicit value, else max(floor, horizon + 2)."""
        if self.sim_cap is not None:
            return self.sim_cap
        return max(DEFAULT_SIM_CAP, self.horizon + 2)

    def resolve_m(self) -> int:
        """Channels per slot: explicit, or nearest-integer alpha*n (min 1 if alpha>0)."""
        if self.m_channels is not None:
            return self.m_channels
        m = int(self.alpha * self.n_users + 0.5)
        if self.alpha > 0.0 and m < 1:
            m = 1
        return m


@dataclass(frozen=True)
class SimAudit:
    """Hard-constraint bookkeeping for one run.

    ``violations`` counts slots where the scheduler did not transmit on
    exactly min(M, n_users) users (must be 0); ``overflow_events`` counts
    saturating index-table lookups; ``total_scheduled`` sums per-user
    transmissions over measured slots and must equal
    scheduled_per_slot * measured_slots * replications.
    """

    scheduled_per_slot: int
    measured_slots: int
    violations: int
    overflow_events: int
    total_scheduled: int


@dataclass(frozen=True)
class SimResult:
    """Time-average empirical incorrectness age with replication CIs."""

    policy: str
    dynamics: str
    n_users: int
    m_channels: int
    horizon: int
    warmup: int
    replications: int
    seed: int
    backend: str
    mean_cost: float
    ci95: float
    rep_means: tuple[float, ...] = field(repr=False)
    per_class_means: tuple[float, ...]
    per_class_ci95: tuple[float, ...]
    audit: SimAudit
