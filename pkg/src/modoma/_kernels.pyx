# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the two hot kernels.

Semantics match modoma._pure exactly (same merge sequences, same null
distribution); only the random-number consumption pattern differs, so a
given seed yields different Monte-Carlo draws per backend.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, exp, log, log1p
from numpy.random cimport bitgen_t

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline i64 _chyper(bitgen_t *rng, i64 good, i64 bad, i64 sample,
                        const double *lf) noexcept nogil:
    """One conditional hypergeometric draw by inverse-CDF walk.

    The walk starts at the lower support bound with an exact log-space pmf
    value, then advances with the linear pmf ratio
    pmf(x+1)/pmf(x) = (good-x)(sample-x) / ((x+1)(bad-sample+x+1)).
    """
    cdef i64 lo, hi, x
    cdef double u, p, c, logp
    if sample <= 0 or good <= 0:
        return 0
    if bad <= 0:
        return sample if sample < good else good
    if sample >= good + bad:
        return good
    lo = sample - bad if sample - bad > 0 else 0
    hi = good if good < sample else sample
    if lo == hi:
        return lo
    logp = (lf[good] - lf[lo] - lf[good - lo]
            + lf[bad] - lf[sample - lo] - lf[bad - sample + lo]
            - (lf[good + bad] - lf[sample] - lf[good + bad - sample]))
    p = exp(logp)
    x = lo
    # if the lower tail underflows, skip it in log space; its total mass is
    # far below the 2^-53 resolution of u, so no draw can land there
    while p == 0.0 and x < hi:
        logp += (log(<double>(good - x)) + log(<double>(sample - x))
                 - log(<double>(x + 1)) - log(<double>(bad - sample + x + 1)))
        x += 1
        p = exp(logp)
    u = rng.next_double(rng.state)
    c = p
    while u > c and x < hi:
        p *= ((<double>(good - x)) * (<double>(sample - x))) / \
             ((<double>(x + 1)) * (<double>(bad - sample + x + 1)))
        x += 1
        c += p
    return x


def mc_extreme_count(observed, iterations, generator):
    """Count simulated fixed-margin tables no more probable than ``observed``.

    ``generator`` is a numpy Generator; draws go through its BitGenerator
    under the BitGenerator lock.
    """
    obs_arr = np.ascontiguousarray(observed, dtype=np.int64)
    if obs_arr.ndim != 2:
        raise ValueError("observed table must be 2-D")
    cdef i64[:, ::1] obs = obs_arr
    cdef Py_ssize_t k = obs.shape[0], m = obs.shape[1]
    rows_arr = obs_arr.sum(axis=1)
    cols_arr = obs_arr.sum(axis=0)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef i64 total = obs_arr.sum()

    lf_arr = np.zeros(total + 1)
    cdef double[::1] lf = lf_arr
    cdef Py_ssize_t i, j
    for i in range(2, total + 1):
        lf[i] = lf[i - 1] + log(<double>i)

    cdef double s_obs = 0.0
    for i in range(k):
        for j in range(m):
            s_obs += lf[obs[i, j]]
    cdef double threshold = s_obs - log1p(1e-7)

    bit_generator = generator.bit_generator
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    cdef bitgen_t *rng = <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")

    col_rem_arr = np.empty(m, dtype=np.int64)
    cdef i64[::1] col_rem = col_rem_arr
    cdef i64 n_iter = iterations
    cdef i64 b, x, good, rem_row, t_row, count = 0
    cdef double s
    with bit_generator.lock, nogil:
        for b in range(n_iter):
            for j in range(m):
                col_rem[j] = cols[j]
            s = 0.0
            for i in range(k - 1):
                rem_row = rows[i]
                t_row = 0
                for j in range(m):
                    t_row += col_rem[j]
                for j in range(m - 1):
                    good = col_rem[j]
                    x = _chyper(rng, good, t_row - good, rem_row, &lf[0])
                    s += lf[x]
                    rem_row -= x
                    t_row -= good
                    col_rem[j] = good - x
                s += lf[rem_row]
                col_rem[m - 1] -= rem_row
            for j in range(m):
                s += lf[col_rem[j]]
            if s >= threshold:
                count += 1
    return int(count)


def complete_link(dist):
    """Complete-link agglomeration over a square distance matrix.

    Same contract as the pure backend: (n-1, 4) rows of
    [id_a, id_b, height, size], globally closest pair first, exact ties
    broken toward the smallest original leaf indices.
    """
    d_arr = np.array(dist, dtype=np.float64)
    if d_arr.ndim != 2 or d_arr.shape[0] != d_arr.shape[1]:
        raise ValueError("distance matrix must be square")
    cdef Py_ssize_t n = d_arr.shape[0]
    np.fill_diagonal(d_arr, np.inf)
    cdef double[:, ::1] d = d_arr
    rep_arr = np.arange(n, dtype=np.int64)
    ids_arr = np.arange(n, dtype=np.int64)
    sizes_arr = np.ones(n, dtype=np.int64)
    alive_arr = np.ones(n, dtype=np.uint8)
    merges_arr = np.empty((n - 1, 4))
    cdef i64[::1] rep = rep_arr
    cdef i64[::1] ids = ids_arr
    cdef i64[::1] sizes = sizes_arr
    cdef cnp.uint8_t[::1] alive = alive_arr
    cdef double[:, ::1] merges = merges_arr
    cdef Py_ssize_t step, a, b, c, keep, kill
    cdef i64 lo, hi, best_lo, best_hi
    cdef double dd, best_d, v
    with nogil:
        for step in range(n - 1):
            best_d = INFINITY
            best_lo = best_hi = -1
            keep = kill = -1
            for a in range(n):
                if not alive[a]:
                    continue
                for b in range(a + 1, n):
                    if not alive[b]:
                        continue
                    dd = d[a, b]
                    if dd > best_d:
                        continue
                    if rep[a] < rep[b]:
                        lo = rep[a]
                        hi = rep[b]
                    else:
                        lo = rep[b]
                        hi = rep[a]
                    if dd < best_d or lo < best_lo or (lo == best_lo and hi < best_hi):
                        best_d = dd
                        best_lo = lo
                        best_hi = hi
                        if rep[a] < rep[b]:
                            keep = a
                            kill = b
                        else:
                            keep = b
                            kill = a
            merges[step, 0] = <double>ids[keep]
            merges[step, 1] = <double>ids[kill]
            merges[step, 2] = best_d
            merges[step, 3] = <double>(sizes[keep] + sizes[kill])
            for c in range(n):
                if alive[c] and c != keep and c != kill:
                    v = d[keep, c] if d[keep, c] > d[kill, c] else d[kill, c]
                    d[keep, c] = v
                    d[c, keep] = v
            alive[kill] = 0
            rep[keep] = best_lo
            ids[keep] = n + step
            sizes[keep] += sizes[kill]
    return merges_arr
