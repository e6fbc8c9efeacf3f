"""Pure-numpy implementations of the two hot kernels.

Used when the compiled extension is unavailable or disabled.  Both backends
implement identical semantics (same merge sequences, same null distribution)
but consume random numbers differently, so Monte-Carlo results for a given
seed differ between backends while agreeing statistically.
"""

from __future__ import annotations

import math

import numpy as np

# one simulated table is filled cell-by-cell across this many samples at once
CHUNK = 65536


def _log_factorials(n: int) -> np.ndarray:
    out = np.zeros(n + 1)
    for i in range(2, n + 1):
        out[i] = out[i - 1] + math.log(i)
    return out


def table_log_prob(table: np.ndarray) -> float:
    """Log-probability of a contingency table under the fixed-margins null."""
    table = np.asarray(table, dtype=np.int64)
    lf = _log_factorials(int(table.sum()))
    return float(
        lf[table.sum(axis=1)].sum()
        + lf[table.sum(axis=0)].sum()
        - lf[table.sum()]
        - lf[table].sum()
    )


def mc_extreme_count(observed: np.ndarray, iterations: int, generator) -> int:
    """Count simulated fixed-margin tables no more probable than ``observed``.

    Tables are drawn from the conditional-on-margins null by filling rows in
    order, each cell a hypergeometric draw from the remaining column budgets.
    Probability comparisons allow the same relative slack as the exact test.
    """
    observed = np.asarray(observed, dtype=np.int64)
    rows = observed.sum(axis=1)
    cols = observed.sum(axis=0)
    k, m = observed.shape
    lf = _log_factorials(int(observed.sum()))
    # margins are fixed, so extremeness reduces to the sum of cell log-factorials
    s_obs = lf[observed].sum()
    threshold = s_obs - math.log1p(1e-7)
    count = 0
    done = 0
    while done < iterations:
        n = min(CHUNK, iterations - done)
        s = np.zeros(n)
        col_rem = np.broadcast_to(cols, (n, m)).copy()
        for i in range(k - 1):
            rem_row = np.full(n, rows[i])
            t_row = col_rem.sum(axis=1)
            for j in range(m - 1):
                good = col_rem[:, j]
                x = generator.hypergeometric(good, t_row - good, rem_row)
                s += lf[x]
                rem_row -= x
                t_row -= good
                col_rem[:, j] = good - x
            s += lf[rem_row]
            col_rem[:, m - 1] -= rem_row
        s += lf[col_rem].sum(axis=1)  # last row is forced
        count += int((s >= threshold).sum())
        done += n
    return count


def complete_link(dist: np.ndarray) -> np.ndarray:
    """Complete-link agglomeration over a square distance matrix.

    Returns an (n-1, 4) merge table of [id_a, id_b, height, size]: leaves are
    ids 0..n-1, the cluster made at step t gets id n+t.  The globally closest
    active pair merges at each step; exact-distance ties are broken toward the
    pair whose clusters contain the smallest original leaf indices, and id_a
    is always the cluster holding the smaller leaf index.
    """
    d = np.array(dist, dtype=np.float64)
    n = d.shape[0]
    if d.shape != (n, n):
        raise ValueError("distance matrix must be square")
    np.fill_diagonal(d, np.inf)
    rep = np.arange(n)  # smallest leaf index inside each active slot
    ids = np.arange(n)
    sizes = np.ones(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    merges = np.empty((n - 1, 4))
    for step in range(n - 1):
        live = np.flatnonzero(alive)
        sub = d[np.ix_(live, live)]
        m = sub.min()
        ii, jj = np.nonzero(sub == m)  # exact ties share the tie-break
        best_pair = None
        keep = kill = -1
        for a, b in zip(live[ii], live[jj]):
            if a >= b:
                continue
            lo, hi = (rep[a], rep[b]) if rep[a] < rep[b] else (rep[b], rep[a])
            if best_pair is None or (lo, hi) < best_pair:
                best_pair = (lo, hi)
                keep, kill = (a, b) if rep[a] < rep[b] else (b, a)
        merges[step] = (ids[keep], ids[kill], m, sizes[keep] + sizes[kill])
        row = np.maximum(d[keep], d[kill])
        d[keep] = row
        d[:, keep] = row
        d[keep, keep] = np.inf
        d[kill] = np.inf
        d[:, kill] = np.inf
        rep[keep] = min(rep[keep], rep[kill])
        ids[keep] = n + step
        sizes[keep] += sizes[kill]
        alive[kill] = False
    return merges
