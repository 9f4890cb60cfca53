# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: the bipartite elimination sweep loop and the ESCB
per-step index scan. Both consume the caller's PCG64 stream through the
BitGenerator capsule, drawing in exactly the order of the pure-python paths.
"""
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.float cimport DBL_MAX
from libc.math cimport log, sqrt

from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

import numpy as np

cdef int MAX_LEVEL = 40


cdef inline long long _pick(bitgen_t *rng, long long n) noexcept:
    cdef long long k = <long long>(rng.next_double(rng.state) * n)
    if k >= n:
        k = n - 1
    return k


cdef inline double _draw(bitgen_t *rng, double mean, int is_gaussian,
                         double sigma) noexcept:
    if is_gaussian:
        if sigma == 0.0:
            return mean
        return mean + sigma * random_standard_normal(rng)
    if rng.next_double(rng.state) < mean:
        return 1.0
    return 0.0


cdef long long _domination(double[:, ::1] qp, double[:, ::1] qm,
                           long long[::1] h, long long[::1] out_set,
                           long long n, long long coords) noexcept:
    """h(i) = largest j dominating i on some coordinate; returns |image set|."""
    cdef long long i, j, c, best, cnt
    cdef bint dom
    for i in range(n):
        best = -1
        for j in range(n):
            dom = False
            for c in range(coords):
                if qp[i, c] < qm[j, c]:
                    dom = True
                    break
            if dom:
                best = j
        h[i] = best if best >= 0 else i
    cnt = 0
    for i in range(n):
        dom = False
        for j in range(n):
            if h[j] == i:
                dom = True
                break
        if dom:
            out_set[cnt] = i
            cnt += 1
    return cnt


def pair_elim_regret(double[:, ::1] w, double opt, long long horizon,
                     long long[::1] grid,
                     long long[::1] ks_row, double[::1] rad_row,
                     long long[:, ::1] ks_col, double[:, ::1] rad_col,
                     long long[::1] win_len, int windowed,
                     int is_gaussian, double sigma, bitgen):
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bitgen.capsule, "BitGenerator")
    cdef long long n = w.shape[0], m = w.shape[1]

    x_arr = np.zeros((n, m)); c_arr = np.zeros((n, m), dtype=np.int64)
    xw_arr = np.zeros((n, m)); cw_arr = np.zeros((n, m), dtype=np.int64)
    plays_arr = np.zeros((n, m), dtype=np.int64)
    cdef double[:, ::1] X = x_arr, Xw = xw_arr
    cdef long long[:, ::1] C = c_arr, Cw = cw_arr, plays = plays_arr

    ras = np.zeros(n); rac = np.zeros(n, dtype=np.int64)
    cas = np.zeros(m); cac = np.zeros(m, dtype=np.int64)
    cdef double[::1] rowagg_sum = ras, colagg_sum = cas
    cdef long long[::1] rowagg_cnt = rac, colagg_cnt = cac

    rlq = np.full((n, m + 1), -1, dtype=np.int64)
    clq = np.full((m, n + 1), -1, dtype=np.int64)
    rqm_a = np.full((n, m + 1), -np.inf); rqp_a = np.full((n, m + 1), np.inf)
    cqm_a = np.full((m, n + 1), -np.inf); cqp_a = np.full((m, n + 1), np.inf)
    cdef long long[:, ::1] rlvl = rlq, clvl = clq
    cdef double[:, ::1] rqm = rqm_a, rqp = rqp_a, cqm = cqm_a, cqp = cqp_a

    hu_a = np.arange(n, dtype=np.int64); hv_a = np.arange(m, dtype=np.int64)
    iset_a = np.arange(n, dtype=np.int64); jset_a = np.arange(m, dtype=np.int64)
    cdef long long[::1] h_u = hu_a, h_v = hv_a, i_set = iset_a, j_set = jset_a
    cdef long long i_cnt = n, j_cnt = m

    cdef long long t = 0, s = 0, wi = 0, gi = 0, glen = grid.shape[0]
    cdef long long n_win = win_len.shape[0], windows_completed = 0
    cdef double cum = 0.0
    cdef bint rows_dirty = False, cols_dirty = False
    cdef long long ii, i, j, jp, ip, cnt, lvl, newl, n_played
    cdef double xval, mean

    cps_t = []
    cps_v = []

    while t < horizon:
        if cols_dirty:
            j_cnt = _domination(cqp, cqm, h_v, j_set, m, n + 1)
            cols_dirty = False
        if rows_dirty:
            i_cnt = _domination(rqp, rqm, h_u, i_set, n, m + 1)
            rows_dirty = False

        # row pass: representative rows vs one random (mapped) column
        jp = h_v[_pick(rng, m)]
        n_played = 0
        for ii in range(i_cnt):
            if t >= horizon:
                break
            i = i_set[ii]
            mean = w[i, jp]
            xval = _draw(rng, mean, is_gaussian, sigma)
            X[i, jp] += xval; C[i, jp] += 1
            rowagg_sum[i] += xval; rowagg_cnt[i] += 1
            plays[i, jp] += 1
            s += 1; t += 1; cum += opt - mean
            n_played += 1
            while gi < glen and grid[gi] <= t:
                cps_t.append(grid[gi]); cps_v.append(cum); gi += 1
        for ii in range(n_played):
            i = i_set[ii]
            cnt = C[i, jp]; lvl = rlvl[i, jp + 1]; newl = lvl
            while newl < MAX_LEVEL and ks_row[newl + 1] <= cnt:
                newl += 1
            if newl > lvl:
                mean = X[i, jp] / cnt
                rlvl[i, jp + 1] = newl
                rqm[i, jp + 1] = mean - rad_row[newl]
                rqp[i, jp + 1] = mean + rad_row[newl]
                rows_dirty = True
            cnt = rowagg_cnt[i]; lvl = rlvl[i, 0]; newl = lvl
            while newl < MAX_LEVEL and ks_row[newl + 1] <= cnt:
                newl += 1
            if newl > lvl:
                mean = rowagg_sum[i] / cnt
                rlvl[i, 0] = newl
                rqm[i, 0] = mean - rad_row[newl]
                rqp[i, 0] = mean + rad_row[newl]
                rows_dirty = True
        if t >= horizon:
            break

        # column pass: representative columns vs one random (mapped) row
        ip = h_u[_pick(rng, n)]
        n_played = 0
        for ii in range(j_cnt):
            if t >= horizon:
                break
            j = j_set[ii]
            mean = w[ip, j]
            xval = _draw(rng, mean, is_gaussian, sigma)
            Xw[ip, j] += xval; Cw[ip, j] += 1
            colagg_sum[j] += xval; colagg_cnt[j] += 1
            plays[ip, j] += 1
            s += 1; t += 1; cum += opt - mean
            n_played += 1
            while gi < glen and grid[gi] <= t:
                cps_t.append(grid[gi]); cps_v.append(cum); gi += 1
        for ii in range(n_played):
            j = j_set[ii]
            cnt = Cw[ip, j]; lvl = clvl[j, ip + 1]; newl = lvl
            while newl < MAX_LEVEL and ks_col[wi, newl + 1] <= cnt:
                newl += 1
            if newl > lvl:
                mean = Xw[ip, j] / cnt
                clvl[j, ip + 1] = newl
                cqm[j, ip + 1] = mean - rad_col[wi, newl]
                cqp[j, ip + 1] = mean + rad_col[wi, newl]
                cols_dirty = True
            cnt = colagg_cnt[j]; lvl = clvl[j, 0]; newl = lvl
            while newl < MAX_LEVEL and ks_col[wi, newl + 1] <= cnt:
                newl += 1
            if newl > lvl:
                mean = colagg_sum[j] / cnt
                clvl[j, 0] = newl
                cqm[j, 0] = mean - rad_col[wi, newl]
                cqp[j, 0] = mean + rad_col[wi, newl]
                cols_dirty = True

        if windowed and s > win_len[wi]:
            s = 0
            xw_arr.fill(0.0); cw_arr.fill(0)
            cas.fill(0.0); cac.fill(0)
            clq.fill(-1); cqm_a.fill(-np.inf); cqp_a.fill(np.inf)
            if wi < n_win - 1:
                wi += 1
            windows_completed += 1
            for ii in range(m):
                h_v[ii] = ii; j_set[ii] = ii
            j_cnt = m
            cols_dirty = False

    return (list(zip(cps_t, cps_v)), plays_arr, int(windows_completed))


def escb_steps(long long[:, ::1] matching_pairs, double[::1] pair_means,
               double[::1] matching_values, double opt, long long horizon,
               long long[::1] grid, double four_n,
               int is_gaussian, double sigma, bitgen):
    """ESCB loop: index = empirical sum + sqrt(f(t)/2 * sum 1/count).

    Matchings containing an unplayed pair get an infinite index; ties go to
    the first enumerated matching. Returns (checkpoints, pair_counts).
    """
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(
        bitgen.capsule, "BitGenerator")
    cdef long long n_match = matching_pairs.shape[0]
    cdef long long n_pairs_per = matching_pairs.shape[1]
    cdef long long n_pairs = pair_means.shape[0]

    cnt_arr = np.zeros(n_pairs, dtype=np.int64)
    sum_arr = np.zeros(n_pairs)
    cdef long long[::1] cnt = cnt_arr
    cdef double[::1] sm = sum_arr

    cdef long long t = 0, gi = 0, glen = grid.shape[0]
    cdef double cum = 0.0
    cdef long long mm, kk, p, best
    cdef double ft, idx, best_idx, means_sum, bonus, xval
    cdef bint has_zero

    cps_t = []
    cps_v = []

    while t < horizon:
        t += 1
        ft = log(<double> t) + four_n * log(log(<double> max(t, 3)))
        best = 0
        best_idx = -DBL_MAX
        for mm in range(n_match):
            means_sum = 0.0
            bonus = 0.0
            has_zero = False
            for kk in range(n_pairs_per):
                p = matching_pairs[mm, kk]
                if cnt[p] == 0:
                    has_zero = True
                    break
                means_sum += sm[p] / cnt[p]
                bonus += 1.0 / cnt[p]
            idx = DBL_MAX if has_zero else means_sum + sqrt(ft * 0.5 * bonus)
            if idx > best_idx:
                best_idx = idx
                best = mm
        for kk in range(n_pairs_per):
            p = matching_pairs[best, kk]
            xval = _draw(rng, pair_means[p], is_gaussian, sigma)
            sm[p] += xval
            cnt[p] += 1
        cum += opt - matching_values[best]
        while gi < glen and grid[gi] <= t:
            cps_t.append(grid[gi]); cps_v.append(cum); gi += 1

    return (list(zip(cps_t, cps_v)), cnt_arr)
