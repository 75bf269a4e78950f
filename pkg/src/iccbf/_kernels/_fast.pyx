# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the pure-Python simulation kernels.

The floor and box loops repeat the pure kernels' arithmetic operation for
operation (same formulas, same evaluation order, same libm calls), so their
logs agree bit-for-bit with `pure.py` on the same inputs.  The halfspace loop
is restricted to two-dimensional inputs, where the projection QP has a small
closed candidate set (nominal, sphere projection, per-line projections,
line/circle intersections, line pairs); its minimizer matches the pure
active-set solver up to solver tolerance, not bitwise.

Limits: chain order n <= MAXN, halfspace input dimension m == 2, at most
MAXP hyperplanes.  The backend dispatcher falls back to the pure kernels
outside these limits.
"""

import numpy as np

from libc.math cimport sqrt, sin, fabs, INFINITY

MAXN = 16
MAXP = 64
HALFSPACE_INPUT_DIM = 2

cdef int _MAXN = 16
cdef int _MAXP = 64
cdef double _FEAS_TOL = 1e-9

cdef int _STATUS_INFEASIBLE = 1
cdef int _STATUS_DOMAIN = 2

cdef int _NOM_CONSTANT = 0
cdef int _NOM_SINUSOID = 1
cdef int _NOM_PIECEWISE = 2
cdef int _NOM_ADVERSARIAL = 3


# ---------------------------------------------------------------- chains

cdef int chain_eval(double h1, const double* tail, const double* gamma,
                    const double* eps, int L, double* h, double* d) noexcept nogil:
    """h_1..h_L and Delta_1..Delta_{L-1}, truncating lazily; returns the number
    of defined levels.  Mirrors chains._chain_core."""
    cdef int i
    cdef double prev, g1, g2, root, hi
    h[0] = h1
    if L >= 2:
        d[0] = 0.0
    for i in range(2, L + 1):
        prev = h[i - 2]
        if prev <= 0.0:
            return i - 1
        g1 = gamma[i - 2]
        g2 = gamma[i - 3] if i >= 3 else 0.0
        root = sqrt(prev)
        hi = tail[i - 2] + g1 * root - 0.5 * g2 * g2 - eps[i - 2]
        h[i - 1] = hi
        if i <= L - 1:
            d[i - 1] = g1 / (2.0 * root) * (hi + d[i - 2] + eps[i - 2])
    return L


cdef double filter_bound(const double* h, const double* d, const double* gamma,
                         const double* eps, int L, bint include_top_margin) noexcept nogil:
    """Constant c of the top-level constraint; caller guarantees the chain is
    complete with h_L >= 0.  Mirrors chains._filter_bound."""
    cdef double top = h[L - 1]
    cdef double c = gamma[L - 1] * sqrt(top)
    cdef double g_prev
    if L >= 2:
        g_prev = gamma[L - 2]
        c += g_prev / (2.0 * sqrt(h[L - 2])) * (top + d[L - 2] + eps[L - 2])
        c -= 0.5 * g_prev * g_prev
    if include_top_margin:
        c -= eps[L - 1]
    return c


# ---------------------------------------------------------------- stepping

cdef void dt_powers(double dt, int n, double* coeff) noexcept nogil:
    cdef int dd
    coeff[0] = 1.0
    for dd in range(1, n + 1):
        coeff[dd] = coeff[dd - 1] * dt / dd


cdef void advance_exact(const double* x, double u, const double* coeff,
                        int n, double* out) noexcept nogil:
    cdef int i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(i, n):
            acc += x[j] * coeff[j - i]
        out[i] = acc + u * coeff[n - i]


cdef void chain_rhs(const double* x, double u, int n, double* dx) noexcept nogil:
    cdef int i
    for i in range(n - 1):
        dx[i] = x[i + 1]
    dx[n - 1] = u


cdef void advance_rk4(const double* x, double u, double dt, int n, double* out) noexcept nogil:
    cdef double k1[16]
    cdef double k2[16]
    cdef double k3[16]
    cdef double k4[16]
    cdef double tmp[16]
    cdef double hdt = 0.5 * dt
    cdef double dt6 = dt / 6.0
    cdef int i
    chain_rhs(x, u, n, k1)
    for i in range(n):
        tmp[i] = x[i] + hdt * k1[i]
    chain_rhs(tmp, u, n, k2)
    for i in range(n):
        tmp[i] = x[i] + hdt * k2[i]
    chain_rhs(tmp, u, n, k3)
    for i in range(n):
        tmp[i] = x[i] + dt * k3[i]
    chain_rhs(tmp, u, n, k4)
    for i in range(n):
        out[i] = x[i] + dt6 * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i])


cdef void advance_euler(const double* x, double u, double dt, int n, double* out) noexcept nogil:
    cdef double dx[16]
    cdef int i
    chain_rhs(x, u, n, dx)
    for i in range(n):
        out[i] = x[i] + dt * dx[i]


cdef void advance(const double* x, double u, double dt, int integrator,
                  const double* coeff, int n, double* out) noexcept nogil:
    if integrator == 0:
        advance_exact(x, u, coeff, n, out)
    elif integrator == 1:
        advance_rk4(x, u, dt, n, out)
    else:
        advance_euler(x, u, dt, n, out)


# ---------------------------------------------------------------- nominal

cdef void nominal_vec(int kind, double scal0, double scal1, const double* times,
                      const double* values, int K, int m, double t,
                      int* cursor, double* out) noexcept nogil:
    """State-independent nominal kinds; the adversarial kind is handled by the
    simulate loops.  The piecewise cursor only moves forward (t is monotone)."""
    cdef int i, idx
    cdef double s
    if kind == _NOM_CONSTANT:
        for i in range(m):
            out[i] = values[i]
    elif kind == _NOM_SINUSOID:
        s = sin(scal0 * t + scal1)
        for i in range(m):
            out[i] = values[i] * s
    else:
        while cursor[0] + 1 < K and times[cursor[0] + 1] <= t:
            cursor[0] += 1
        idx = cursor[0]
        for i in range(m):
            out[i] = values[idx * m + i]


# ---------------------------------------------------------------- floor

def simulate_floor(x0, double x1_lower, gamma, eps, double u_lo, double u_hi,
                   nom, double dt, int nsteps, int integrator):
    """Compiled twin of pure.simulate_floor; same signature and return shape."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    g_arr = np.ascontiguousarray(gamma, dtype=np.float64)
    e_arr = np.ascontiguousarray(eps, dtype=np.float64)
    cdef int n = x0.shape[0]
    if n < 1 or n > _MAXN:
        raise ValueError(f"compiled kernel supports 1 <= n <= {_MAXN}, got {n}")

    cdef int rows_max = nsteps + 1
    states = np.full((rows_max, n), np.nan)
    u_nom_log = np.full((rows_max, 1), np.nan)
    u_log = np.full((rows_max, 1), np.nan)
    barriers = np.full((rows_max, n), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)

    times = np.ascontiguousarray(nom.times, dtype=np.float64)
    values = np.ascontiguousarray(nom.values, dtype=np.float64)

    cdef double[:, ::1] S = states
    cdef double[:, ::1] UN = u_nom_log
    cdef double[:, ::1] U = u_log
    cdef double[:, ::1] B = barriers
    cdef double[::1] M = margin
    cdef signed char[::1] ST = status
    cdef double[::1] gv = g_arr
    cdef double[::1] ev = e_arr
    cdef double[::1] xin = x0
    cdef double[::1] T = times
    cdef double[:, ::1] V = values
    cdef int K = T.shape[0]
    cdef int kind = nom.kind
    cdef double scal0 = nom.scal0
    cdef double scal1 = nom.scal1

    cdef double x[16]
    cdef double nxt[16]
    cdef double h[16]
    cdef double d[16]
    cdef double coeff[17]
    cdef double uvec[1]
    cdef int cursor = 0
    cdef int rows = 0
    cdef int k, i, defined
    cdef double un, c1, lo, hi, u, neg

    for i in range(n):
        x[i] = xin[i]

    with nogil:
        dt_powers(dt, n, coeff)
        for k in range(rows_max):
            rows = k + 1
            for i in range(n):
                S[k, i] = x[i]
            defined = chain_eval(x[0] - x1_lower, &x[0] + 1, &gv[0], &ev[0], n, h, d)
            for i in range(defined):
                B[k, i] = h[i]

            if kind == _NOM_ADVERSARIAL:
                un = -u_hi
            else:
                nominal_vec(kind, scal0, scal1, &T[0], &V[0, 0], K, 1, k * dt, &cursor, uvec)
                un = uvec[0]
            UN[k, 0] = un

            if defined < n or h[n - 1] < 0.0:
                ST[k] = _STATUS_DOMAIN
                break
            c1 = filter_bound(h, d, &gv[0], &ev[0], n, True)
            neg = -c1
            lo = u_lo if u_lo > neg else neg
            hi = u_hi
            M[k] = 0.5 * (hi - lo)
            if lo > hi:
                ST[k] = _STATUS_INFEASIBLE
                break
            u = un if un > lo else lo
            if u > hi:
                u = hi
            U[k, 0] = u
            if k < nsteps:
                advance(x, u, dt, integrator, coeff, n, nxt)
                for i in range(n):
                    x[i] = nxt[i]

    return (states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows],
            margin[:rows], status[:rows], rows)


# ---------------------------------------------------------------- box

def simulate_box(x0, bounds_lo, bounds_hi, lower_gamma, lower_eps,
                 upper_gamma, upper_eps, double u_lo, double u_hi,
                 nom, double dt, int nsteps, int integrator):
    """Compiled twin of pure.simulate_box; same signature and return shape."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    blo_arr = np.ascontiguousarray(bounds_lo, dtype=np.float64)
    bhi_arr = np.ascontiguousarray(bounds_hi, dtype=np.float64)
    cdef int n = x0.shape[0]
    if n < 1 or n > _MAXN:
        raise ValueError(f"compiled kernel supports 1 <= n <= {_MAXN}, got {n}")

    # Pad the per-chain parameter rows (chain j has n-j+1 levels) into (n, n).
    glo = np.zeros((n, n))
    elo = np.zeros((n, n))
    gup = np.zeros((n, n))
    eup = np.zeros((n, n))
    for j in range(n):
        glo[j, : n - j] = lower_gamma[j]
        elo[j, : n - j] = lower_eps[j]
        gup[j, : n - j] = upper_gamma[j]
        eup[j, : n - j] = upper_eps[j]

    cdef int rows_max = nsteps + 1
    cdef int width = n * (n + 1)
    states = np.full((rows_max, n), np.nan)
    u_nom_log = np.full((rows_max, 1), np.nan)
    u_log = np.full((rows_max, 1), np.nan)
    barriers = np.full((rows_max, width), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)

    times = np.ascontiguousarray(nom.times, dtype=np.float64)
    values = np.ascontiguousarray(nom.values, dtype=np.float64)

    cdef double[:, ::1] S = states
    cdef double[:, ::1] UN = u_nom_log
    cdef double[:, ::1] U = u_log
    cdef double[:, ::1] B = barriers
    cdef double[::1] M = margin
    cdef signed char[::1] ST = status
    cdef double[::1] xin = x0
    cdef double[::1] BLO = blo_arr
    cdef double[::1] BHI = bhi_arr
    cdef double[:, ::1] GLO = glo
    cdef double[:, ::1] ELO = elo
    cdef double[:, ::1] GUP = gup
    cdef double[:, ::1] EUP = eup
    cdef double[::1] T = times
    cdef double[:, ::1] V = values
    cdef int K = T.shape[0]
    cdef int kind = nom.kind
    cdef double scal0 = nom.scal0
    cdef double scal1 = nom.scal1

    cdef double x[16]
    cdef double nxt[16]
    cdef double h[16]
    cdef double d[16]
    cdef double tail[16]
    cdef double coeff[17]
    cdef double uvec[1]
    cdef int cursor = 0
    cdef int rows = 0
    cdef int k, i, jj, L, defined, failed, col
    cdef bint nearest_lower
    cdef double un, lo, hi, u, nearest, gap_lo, gap_hi, c

    for i in range(n):
        x[i] = xin[i]

    with nogil:
        dt_powers(dt, n, coeff)
        for k in range(rows_max):
            rows = k + 1
            for i in range(n):
                S[k, i] = x[i]

            lo = u_lo
            hi = u_hi
            failed = 0
            col = 0
            nearest = INFINITY
            nearest_lower = True
            for jj in range(n):
                gap_lo = x[jj] - BLO[jj]
                gap_hi = BHI[jj] - x[jj]
                if gap_lo < nearest:
                    nearest = gap_lo
                    nearest_lower = True
                if gap_hi < nearest:
                    nearest = gap_hi
                    nearest_lower = False
            for jj in range(n):
                L = n - jj
                defined = chain_eval(x[jj] - BLO[jj], &x[0] + jj + 1,
                                     &GLO[jj, 0], &ELO[jj, 0], L, h, d)
                for i in range(defined):
                    B[k, col + i] = h[i]
                col += L
                if defined < L or h[L - 1] < 0.0:
                    failed = 1
                else:
                    c = -filter_bound(h, d, &GLO[jj, 0], &ELO[jj, 0], L, True)
                    if c > lo:
                        lo = c
            for jj in range(n):
                L = n - jj
                for i in range(L - 1):
                    tail[i] = -x[jj + 1 + i]
                defined = chain_eval(BHI[jj] - x[jj], tail,
                                     &GUP[jj, 0], &EUP[jj, 0], L, h, d)
                for i in range(defined):
                    B[k, col + i] = h[i]
                col += L
                if defined < L or h[L - 1] < 0.0:
                    failed = 1
                else:
                    c = filter_bound(h, d, &GUP[jj, 0], &EUP[jj, 0], L, True)
                    if c < hi:
                        hi = c

            if kind == _NOM_ADVERSARIAL:
                un = -u_hi if nearest_lower else u_hi
            else:
                nominal_vec(kind, scal0, scal1, &T[0], &V[0, 0], K, 1, k * dt, &cursor, uvec)
                un = uvec[0]
            UN[k, 0] = un

            if failed:
                ST[k] = _STATUS_DOMAIN
                break
            M[k] = 0.5 * (hi - lo)
            if lo > hi:
                ST[k] = _STATUS_INFEASIBLE
                break
            u = un if un > lo else lo
            if u > hi:
                u = hi
            U[k, 0] = u
            if k < nsteps:
                advance(x, u, dt, integrator, coeff, n, nxt)
                for i in range(n):
                    x[i] = nxt[i]

    return (states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows],
            margin[:rows], status[:rows], rows)


# ---------------------------------------------------------------- halfspaces

cdef double qp2_try(const double* rdir, const double* cs, int p, double R,
                    const double* unom, double cx, double cy, double best,
                    double* ubest) noexcept nogil:
    """Keep candidate (cx, cy) if it is feasible and beats the best objective."""
    cdef int k
    cdef double slack, obj
    for k in range(p):
        slack = rdir[2 * k] * cx + rdir[2 * k + 1] * cy + cs[k]
        if slack < -_FEAS_TOL:
            return best
    if sqrt(cx * cx + cy * cy) > R + _FEAS_TOL:
        return best
    obj = (cx - unom[0]) * (cx - unom[0]) + (cy - unom[1]) * (cy - unom[1])
    if obj < best:
        ubest[0] = cx
        ubest[1] = cy
        return obj
    return best


cdef bint qp2_solve(const double* rdir, const double* cs, int p, double R,
                    const double* unom, double* ubest) noexcept nogil:
    """Projection of unom onto {r_k.u + c_k >= 0, ||u|| <= R} in 2-D.

    The minimizer lies in the closed candidate set: the nominal itself, its
    sphere projection, per-line projections, line/circle intersection points,
    and line-pair vertices (three or more active lines in the plane reduce to
    a pair).  Returns False when no candidate is feasible.
    """
    cdef double best = INFINITY
    cdef int k, l
    cdef double nrm, s, bx, by, disc, root, px, py, det, ux, uy

    best = qp2_try(rdir, cs, p, R, unom, unom[0], unom[1], best, ubest)
    nrm = sqrt(unom[0] * unom[0] + unom[1] * unom[1])
    if nrm > 0.0:
        best = qp2_try(rdir, cs, p, R, unom, R * unom[0] / nrm, R * unom[1] / nrm, best, ubest)
    else:
        best = qp2_try(rdir, cs, p, R, unom, R, 0.0, best, ubest)

    for k in range(p):
        s = rdir[2 * k] * unom[0] + rdir[2 * k + 1] * unom[1] + cs[k]
        best = qp2_try(rdir, cs, p, R, unom,
                       unom[0] - s * rdir[2 * k], unom[1] - s * rdir[2 * k + 1], best, ubest)
        disc = R * R - cs[k] * cs[k]
        if disc >= 0.0:
            root = sqrt(disc)
            bx = -cs[k] * rdir[2 * k]
            by = -cs[k] * rdir[2 * k + 1]
            px = -rdir[2 * k + 1]
            py = rdir[2 * k]
            best = qp2_try(rdir, cs, p, R, unom, bx + root * px, by + root * py, best, ubest)
            best = qp2_try(rdir, cs, p, R, unom, bx - root * px, by - root * py, best, ubest)

    for k in range(p):
        for l in range(k + 1, p):
            det = rdir[2 * k] * rdir[2 * l + 1] - rdir[2 * k + 1] * rdir[2 * l]
            if fabs(det) > 1e-14:
                ux = (-cs[k] * rdir[2 * l + 1] + cs[l] * rdir[2 * k + 1]) / det
                uy = (-cs[l] * rdir[2 * k] + cs[k] * rdir[2 * l]) / det
                best = qp2_try(rdir, cs, p, R, unom, ux, uy, best, ubest)

    return best < INFINITY


def simulate_halfspaces(x0, directions, offsets, gamma, eps, double u_ball,
                        bint include_top_margin, nom, double dt, int nsteps,
                        int integrator):
    """Compiled twin of pure.simulate_halfspaces for input dimension m == 2."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    dir_arr = np.ascontiguousarray(directions, dtype=np.float64)
    off_arr = np.ascontiguousarray(offsets, dtype=np.float64)
    g_arr = np.ascontiguousarray(gamma, dtype=np.float64)
    e_arr = np.ascontiguousarray(eps, dtype=np.float64)
    cdef int p = dir_arr.shape[0]
    cdef int m = dir_arr.shape[1]
    cdef int n = g_arr.shape[1]
    if m != 2:
        raise ValueError(f"compiled halfspace kernel supports m == 2, got {m}")
    if n < 1 or n > _MAXN:
        raise ValueError(f"compiled kernel supports 1 <= n <= {_MAXN}, got {n}")
    if p < 1 or p > _MAXP:
        raise ValueError(f"compiled kernel supports 1 <= p <= {_MAXP}, got {p}")

    cdef int rows_max = nsteps + 1
    states = np.full((rows_max, n * m), np.nan)
    u_nom_log = np.full((rows_max, m), np.nan)
    u_log = np.full((rows_max, m), np.nan)
    barriers = np.full((rows_max, p * n), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)

    times = np.ascontiguousarray(nom.times, dtype=np.float64)
    values = np.ascontiguousarray(nom.values, dtype=np.float64)

    cdef double[:, ::1] S = states
    cdef double[:, ::1] UN = u_nom_log
    cdef double[:, ::1] U = u_log
    cdef double[:, ::1] B = barriers
    cdef double[::1] M = margin
    cdef signed char[::1] ST = status
    cdef double[::1] xin = x0
    cdef double[:, ::1] DIR = dir_arr
    cdef double[::1] OFF = off_arr
    cdef double[:, ::1] G = g_arr
    cdef double[:, ::1] E = e_arr
    cdef double[::1] T = times
    cdef double[:, ::1] V = values
    cdef int K = T.shape[0]
    cdef int kind = nom.kind
    cdef double scal0 = nom.scal0
    cdef double scal1 = nom.scal1

    cdef double x[32]
    cdef double nxt[32]
    cdef double xc[16]
    cdef double nc[16]
    cdef double z[16]
    cdef double h[16]
    cdef double d[16]
    cdef double cs[64]
    cdef double coeff[17]
    cdef double un[2]
    cdef double u[2]
    cdef int cursor = 0
    cdef int rows = 0
    cdef int k, i, kk, comp, defined, failed, nearest
    cdef double nearest_h1, slack, slack_min, mrg

    for i in range(n * m):
        x[i] = xin[i]

    with nogil:
        dt_powers(dt, n, coeff)
        for k in range(rows_max):
            rows = k + 1
            for i in range(n * m):
                S[k, i] = x[i]

            failed = 0
            nearest = 0
            nearest_h1 = INFINITY
            for kk in range(p):
                for i in range(n):
                    z[i] = x[2 * i] * DIR[kk, 0] + x[2 * i + 1] * DIR[kk, 1]
                defined = chain_eval(z[0] + OFF[kk], z + 1, &G[kk, 0], &E[kk, 0], n, h, d)
                for i in range(defined):
                    B[k, kk * n + i] = h[i]
                if h[0] < nearest_h1:
                    nearest_h1 = h[0]
                    nearest = kk
                if defined < n or h[n - 1] < 0.0:
                    failed = 1
                else:
                    cs[kk] = filter_bound(h, d, &G[kk, 0], &E[kk, 0], n, include_top_margin)

            if kind == _NOM_ADVERSARIAL:
                un[0] = -u_ball * DIR[nearest, 0]
                un[1] = -u_ball * DIR[nearest, 1]
            else:
                nominal_vec(kind, scal0, scal1, &T[0], &V[0, 0], K, m, k * dt, &cursor, un)
            UN[k, 0] = un[0]
            UN[k, 1] = un[1]

            if failed:
                ST[k] = _STATUS_DOMAIN
                break
            if not qp2_solve(&DIR[0, 0], cs, p, u_ball, un, u):
                ST[k] = _STATUS_INFEASIBLE
                break
            U[k, 0] = u[0]
            U[k, 1] = u[1]
            slack_min = INFINITY
            for kk in range(p):
                slack = DIR[kk, 0] * u[0] + DIR[kk, 1] * u[1] + cs[kk]
                if slack < slack_min:
                    slack_min = slack
            mrg = u_ball - sqrt(u[0] * u[0] + u[1] * u[1])
            M[k] = slack_min if slack_min < mrg else mrg
            if k < nsteps:
                for comp in range(m):
                    for i in range(n):
                        xc[i] = x[i * m + comp]
                    advance(xc, u[comp], dt, integrator, coeff, n, nc)
                    for i in range(n):
                        nxt[i * m + comp] = nc[i]
                for i in range(n * m):
                    x[i] = nxt[i]

    return (states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows],
            margin[:rows], status[:rows], rows)
