"""Multi-user Monte Carlo engine: replication driver plus single-step reference ops.

The scheduler is deliberately blind: its inputs are ladder clocks, a
round-robin counter or policy noise - never the true source states. All
randomness per replication flows from one spawned PCG64 stream, pre-drawn
in fixed-size blocks, so runs are reproducible bit for bit and both kernel
backends agree exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from maoii.errors import ConfigError, LadderOverflow, TruncationError
from maoii.metrics import Metric
from maoii.sim.config import ClassSpec, SimAudit, SimConfig, SimResult
from maoii.sources import SourceParams
from maoii.whittle import WhittleTable, get_table

# Part of the random-stream layout: uniforms are drawn in blocks of
# (CHUNK_SLOTS, 3, n_users); changing the block size changes trajectories.
CHUNK_SLOTS = 4096

_POLICY_KIND = {"wip-maoii": 0, "wip-aoi": 0, "round-robin": 1, "random": 2}
_POLICY_METRIC = {"wip-maoii": Metric.MAOII, "wip-aoi": Metric.AOI}


def load_kernel(backend: str = "auto"):
    """Select the compiled kernel when available, else the pure-Python twin.

    ``MAOII_PURE_PYTHON=1`` forces the fallback for ``auto``; asking for
    ``compiled`` explicitly overrides the environment.
    """
    if backend not in ("auto", "compiled", "python"):
        raise ConfigError(f"unknown backend {backend!r}")
    if backend == "python":
        from maoii.sim import _kernel_py

        return _kernel_py, "python"
    if backend == "auto" and os.environ.get("MAOII_PURE_PYTHON"):
        from maoii.sim import _kernel_py

        return _kernel_py, "python"
    try:
        from maoii.sim import _kernel

        return _kernel, "compiled"
    except ImportError:
        if backend == "compiled":
            raise ConfigError("compiled kernel requested but not built")
        from maoii.sim import _kernel_py

        return _kernel_py, "python"


# ---------------------------------------------------------------------------
# Single-user, single-slot reference operations. These define the dynamics
# the kernels batch; property tests drive them directly.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UserRuntime:
    """One tracked user: scheduler-visible clock plus ground-truth bookkeeping."""

    class_id: int
    params: SourceParams
    j: int = 1
    emp_age: int = 0
    truth_state: int = 0
    estimate: int = 0


def empirical_step(
    user: UserRuntime,
    scheduled: bool,
    rng,
    u_channel: float | None = None,
    u_transition: float | None = None,
) -> UserRuntime:
    """One slot of the reduced age chain (the marginal law of the true AoII).

    Explicit uniforms may be supplied to align with a kernel trace; by
    default they come from ``rng`` in kernel order (channel, transition).
    """
    p, r, rho = user.params.p, user.params.r, user.params.rho
    uc = rng.random() if u_channel is None else u_channel
    ut = rng.random() if u_transition is None else u_transition
    success = scheduled and uc < rho
    j = 1 if success else user.j + 1
    if user.emp_age == 0 or success:
        age = 0 if ut < p else 1
    else:
        age = 0 if ut < r else user.emp_age + 1
    return replace(user, j=j, emp_age=age)


def ground_truth_step(
    user: UserRuntime,
    scheduled: bool,
    rng,
    u_channel: float | None = None,
    u_transition: float | None = None,
) -> UserRuntime:
    """One slot of the full chain: move the source, deliver, re-derive the age.

    On a delivery the estimate becomes the just-sampled state, which was
    correct at sampling time, so a still-wrong estimate restarts at age 1.
    """
    p, r, rho = user.params.p, user.params.r, user.params.rho
    n = user.params.num_states
    uc = rng.random() if u_channel is None else u_channel
    ut = rng.random() if u_transition is None else u_transition
    success = scheduled and uc < rho

    xo = user.truth_state
    if ut < p:
        xn = xo
    else:
        k = int((ut - p) / r)
        k = min(k, n - 2)
        xn = k if k < xo else k + 1

    estimate = xo if success else user.estimate
    if xn == estimate:
        age = 0
    elif success:
        age = 1
    else:
        age = user.emp_age + 1
    j = 1 if success else user.j + 1
    return replace(user, j=j, emp_age=age, truth_state=xn, estimate=estimate)


def select_top_m(index_values, m: int) -> set[int]:
    """Ids of the min(m, n) largest values; ties broken by lowest id."""
    if m < 0:
        raise ConfigError(f"m must be >= 0, got {m}")
    n = len(index_values)
    order = sorted(range(n), key=lambda i: (-index_values[i], i))
    return set(order[: min(m, n)])


def policy_index(
    policy: str,
    user: UserRuntime,
    tables: dict[int, WhittleTable] | None = None,
    since_scheduled: int | None = None,
    rng=None,
    strict: bool = False,
) -> float:
    """Scheduling priority of one user under the named policy.

    Index policies read the prebuilt per-class table at the user's clock;
    lookups past the table saturate (and raise LadderOverflow when
    ``strict``). Baselines: round-robin uses slots-since-scheduled, random
    draws from ``rng``.
    """
    if policy in _POLICY_METRIC:
        if tables is None:
            raise ConfigError("index policies need prebuilt per-class tables")
        value, overflowed = tables[user.class_id].lookup(user.j)
        if overflowed and strict:
            raise LadderOverflow(f"clock {user.j} exceeds table n_max")
        return value
    if policy == "round-robin":
        if since_scheduled is None:
            raise ConfigError("round-robin needs the slots-since-scheduled counter")
        return float(since_scheduled)
    if policy == "random":
        if rng is None:
            raise ConfigError("random policy needs an rng")
        return float(rng.random())
    raise ConfigError(f"unknown policy {policy!r}")


# ---------------------------------------------------------------------------
# Replication driver.
# ---------------------------------------------------------------------------


def _class_arrays(classes: tuple[ClassSpec, ...]):
    p = np.array([c.params.p for c in classes])
    r = np.array([c.params.r for c in classes])
    rho = np.array([c.params.rho for c in classes])
    nstates = np.array([c.params.num_states for c in classes], dtype=np.int64)
    cls = np.concatenate(
        [np.full(c.count, k, dtype=np.int64) for k, c in enumerate(classes)]
    )
    return p, r, rho, nstates, cls


def _policy_tables(config: SimConfig) -> np.ndarray:
    metric = _POLICY_METRIC.get(config.policy)
    if metric is None:
        return np.zeros((len(config.classes), 1))
    rows = [
        get_table(c.params, metric, config.table_n_max).indices for c in config.classes
    ]
    return np.ascontiguousarray(np.stack(rows))


def run(config: SimConfig, backend: str = "auto") -> SimResult:
    """Run all replications of one experiment and aggregate.

    Replication streams are spawned from the config seed independently of
    the policy, so matched seeds give common random numbers across
    policies. Identical (config, seed) yields identical results on either
    backend.
    """
    kernel, backend_name = load_kernel(backend)
    p, r, rho, nstates, cls = _class_arrays(config.classes)
    table = _policy_tables(config)
    policy_kind = _POLICY_KIND[config.policy]
    mode = 0 if config.dynamics == "reduced" else 1
    n_u = config.n_users
    m = config.resolve_m()
    sim_cap = config.resolve_sim_cap()
    measured = config.horizon - config.warmup

    rep_means = []
    class_slices = []
    start = 0
    for c in config.classes:
        class_slices.append(slice(start, start + c.count))
        start += c.count
    rep_class_means = []
    violations = 0
    overflows = 0
    total_scheduled = 0

    seeds = np.random.SeedSequence(config.seed).spawn(config.replications)
    for seed in seeds:
        rng = np.random.Generator(np.random.PCG64(seed))
        jj = np.ones(n_u, dtype=np.int64)
        age = np.zeros(n_u, dtype=np.int64)
        since = np.ones(n_u, dtype=np.int64)
        x = np.zeros(n_u, dtype=np.int64)
        xhat = np.zeros(n_u, dtype=np.int64)
        age_sum = np.zeros(n_u)
        sched_count = np.zeros(n_u, dtype=np.int64)
        sel = np.zeros(n_u, dtype=np.int64)
        vals = np.zeros(n_u)

        pos = 0
        while pos < config.horizon:
            slots = min(CHUNK_SLOTS, config.horizon - pos)
            u = rng.random((slots, 3, n_u))
            measure_from = min(max(config.warmup - pos, 0), slots)
            v, o, capped = kernel.simulate_chunk(
                u, jj, age, since, x, xhat, cls, p, r, rho, nstates, table,
                policy_kind, mode, m, measure_from, sim_cap,
                age_sum, sched_count, sel, vals,
            )
            violations += v
            overflows += o
            if capped:
                raise TruncationError(f"a clock or age exceeded sim_cap={sim_cap}")
            pos += slots

        user_means = age_sum / measured
        rep_means.append(float(user_means.mean()))
        rep_class_means.append([float(user_means[s].mean()) for s in class_slices])
        total_scheduled += int(sched_count.sum())

    rep_means_arr = np.array(rep_means)
    class_means_arr = np.array(rep_class_means)  # (reps, classes)
    mean_cost = float(rep_means_arr.mean())
    ci95 = _ci_halfwidth(rep_means_arr)
    per_class_means = tuple(float(v) for v in class_means_arr.mean(axis=0))
    per_class_ci = tuple(_ci_halfwidth(class_means_arr[:, k]) for k in range(len(config.classes)))

    audit = SimAudit(
        scheduled_per_slot=min(m, n_u),
        measured_slots=measured,
        violations=violations,
        overflow_events=overflows,
        total_scheduled=total_scheduled,
    )
    return SimResult(
        policy=config.policy,
        dynamics=config.dynamics,
        n_users=n_u,
        m_channels=m,
        horizon=config.horizon,
        warmup=config.warmup,
        replications=config.replications,
        seed=config.seed,
        backend=backend_name,
        mean_cost=mean_cost,
        ci95=ci95,
        rep_means=tuple(rep_means),
        per_class_means=per_class_means,
        per_class_ci95=per_class_ci,
        audit=audit,
    )


def _ci_halfwidth(samples: np.ndarray) -> float:
    """95% half-width across replications (Student t)."""
    n = samples.size
    if n < 2:
        return 0.0
    sd = float(samples.std(ddof=1))
    if sd == 0.0 or math.isnan(sd):
        return 0.0
    return float(stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n))
