"""Pure-Python scheduling/dynamics kernel.

Reference semantics for the compiled kernel in ``_kernel.pyx``: both consume
the same pre-drawn uniform block and must produce bit-identical state, so
every comparison below is mirrored exactly there. Row 0 of the block feeds
the random policy, row 1 the channel, row 2 the source/age transition.
"""

from __future__ import annotations

NEG_INF = float("-inf")


def simulate_chunk(
    u,            # float64[slots, 3, n_users]
    jj,           # int64[n_users]   ladder clock, >= 1
    age,          # int64[n_users]   empirical incorrectness age
    since_sched,  # int64[n_users]   slots since last scheduled
    x,            # int64[n_users]   true source state (ground-truth mode)
    xhat,         # int64[n_users]   monitor estimate (ground-truth mode)
    cls,          # int64[n_users]   class id per user
    p,            # float64[n_classes]
    r,            # float64[n_classes]
    rho,          # float64[n_classes]
    nstates,      # int64[n_classes]
    table,        # float64[n_classes, n_max] index table (policy_kind 0)
    policy_kind,  # 0 index table, 1 round-robin, 2 random
    mode,         # 0 reduced, 1 ground truth
    m_sched,      # channels per slot
    measure_from, # first slot (within this chunk) that accumulates
    sim_cap,      # abort when any clock or age exceeds this
    age_sum,      # float64[n_users] accumulator
    sched_count,  # int64[n_users]  accumulator
    sel,          # int64[n_users]  scratch
    vals,         # float64[n_users] scratch
):
    """Advance all users by u.shape[0] slots; returns (violations, overflows, capped)."""
    slots = u.shape[0]
    n_u = jj.shape[0]
    n_max = table.shape[1]
    violations = 0
    overflows = 0
    m = m_sched if m_sched < n_u else n_u

    for s in range(slots):
        if policy_kind == 0:
            for i in range(n_u):
                j = jj[i]
                if j > n_max:
                    overflows += 1
                    j = n_max
                vals[i] = table[cls[i], j - 1]
        elif policy_kind == 1:
            for i in range(n_u):
                vals[i] = since_sched[i]
        else:
            for i in range(n_u):
                vals[i] = u[s, 0, i]

        # top-m: repeated strict-max scan, so ties go to the lowest id
        for i in range(n_u):
            sel[i] = 0
        picked = 0
        for _ in range(m):
            best = NEG_INF
            bi = -1
            for i in range(n_u):
                if sel[i] == 0 and vals[i] > best:
                    best = vals[i]
                    bi = i
            if bi >= 0:
                sel[bi] = 1
                picked += 1
        if picked != m:
            violations += 1

        measure = s >= measure_from
        for i in range(n_u):
            c = cls[i]
            scheduled = sel[i] == 1
            success = scheduled and u[s, 1, i] < rho[c]
            jj[i] = 1 if success else jj[i] + 1
            since_sched[i] = 1 if scheduled else since_sched[i] + 1
            ut = u[s, 2, i]
            if mode == 0:
                # estimate correct, or refreshed to the just-sampled state:
                # next age is 0 iff the source holds still
                if age[i] == 0 or success:
                    age[i] = 0 if ut < p[c] else 1
                else:
                    age[i] = 0 if ut < r[c] else age[i] + 1
            else:
                xo = x[i]
                if ut < p[c]:
                    xn = xo
                else:
                    k = int((ut - p[c]) / r[c])
                    nm2 = nstates[c] - 2
                    if k > nm2:
                        k = nm2
                    xn = k if k < xo else k + 1
                if success:
                    xhat[i] = xo
                if xn == xhat[i]:
                    age[i] = 0
                elif success:
                    age[i] = 1
                else:
                    age[i] += 1
                x[i] = xn
            if jj[i] > sim_cap or age[i] > sim_cap:
                return violations, overflows, 1
            if measure:
                age_sum[i] += age[i]
                if scheduled:
                    sched_count[i] += 1
    return violations, overflows, 0
