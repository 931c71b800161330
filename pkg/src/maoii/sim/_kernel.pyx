# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scheduling/dynamics kernel.

Line-for-line twin of ``_kernel_py.simulate_chunk``; consumes the same
pre-drawn uniform block and must produce bit-identical state. Keep the two
in sync: any semantic change here must land there too.
"""


def simulate_chunk(
    const double[:, :, ::1] u,
    long long[::1] jj,
    long long[::1] age,
    long long[::1] since_sched,
    long long[::1] x,
    long long[::1] xhat,
    const long long[::1] cls,
    const double[::1] p,
    const double[::1] r,
    const double[::1] rho,
    const long long[::1] nstates,
    const double[:, ::1] table,
    int policy_kind,
    int mode,
    int m_sched,
    int measure_from,
    long long sim_cap,
    double[::1] age_sum,
    long long[::1] sched_count,
    long long[::1] sel,
    double[::1] vals,
):
    """Advance all users by u.shape[0] slots; returns (violations, overflows, capped)."""
    cdef Py_ssize_t slots = u.shape[0]
    cdef Py_ssize_t n_u = jj.shape[0]
    cdef Py_ssize_t n_max = table.shape[1]
    cdef Py_ssize_t s, i, pick, bi
    cdef long long j, k, nm2, c, xo, xn
    cdef long long violations = 0
    cdef long long overflows = 0
    cdef long long picked
    cdef double best, ut
    cdef double neg_inf = float("-inf")
    cdef Py_ssize_t m = m_sched if m_sched < n_u else n_u
    cdef bint scheduled, success, measure

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
                vals[i] = <double> since_sched[i]
        else:
            for i in range(n_u):
                vals[i] = u[s, 0, i]

        # top-m: repeated strict-max scan, so ties go to the lowest id
        for i in range(n_u):
            sel[i] = 0
        picked = 0
        for pick in range(m):
            best = neg_inf
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
                    k = <long long> ((ut - p[c]) / r[c])
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
                age_sum[i] += <double> age[i]
                if scheduled:
                    sched_count[i] += 1
    return violations, overflows, 0
