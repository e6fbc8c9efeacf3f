"""Contingency statistics for comparing two category assignments.

Overlap counts between assignments form a crosstab; association is tested
with the exact two-sided Fisher test for 2x2 tables, a Monte-Carlo Fisher
test with fixed margins for larger tables, and a Bonferroni-corrected sweep
of all pairwise 2x2 subtables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels

# probability comparisons against the observed table allow this relative
# slack, the standard guard for "as extreme" under floating point
REL_TOL = 1e-7


@dataclass
class Crosstab:
    """Overlap counts: rows one assignment's categories, columns the other's."""

    row_labels: list
    col_labels: list
    counts: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Crosstab):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.counts, other.counts)
        )


@dataclass
class TestResult:
    """Outcome of one significance test; p is never exactly 0."""

    p: float
    method: str  # "exact" or "monte_carlo"
    iterations: int | None = None
    seed: int | None = None
    correction: int | None = None


def crosstab(a: dict, b: dict) -> Crosstab:
    """Tabulate category overlap of two assignments over their shared tokens.

    Rows come from ``a``, columns from ``b``; every category of each side
    appears even when no shared token carries it.  Labels sort by value.
    """
    row_labels = sorted(set(a.values()))
    col_labels = sorted(set(b.values()))
    row_of = {lab: i for i, lab in enumerate(row_labels)}
    col_of = {lab: j for j, lab in enumerate(col_labels)}
    counts = np.zeros((len(row_labels), len(col_labels)), dtype=np.int64)
    for token in set(a) & set(b):
        counts[row_of[a[token]], col_of[b[token]]] += 1
    return Crosstab(row_labels, col_labels, counts)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def fisher_exact_2x2(table) -> TestResult:
    """Two-sided exact test: sum hypergeometric probabilities of all tables
    with the observed margins that are no more probable than the observed one.

    A zero margin leaves only one possible table, so p = 1.
    """
    t = np.asarray(table, dtype=np.int64)
    if t.shape != (2, 2) or (t < 0).any():
        raise ValueError("need a nonnegative 2x2 table")
    a, b = int(t[0, 0]), int(t[0, 1])
    c, d = int(t[1, 0]), int(t[1, 1])
    r0, c0, n = a + b, a + c, a + b + c + d
    # a zero margin (or an empty table) admits a single table: p = 1
    if r0 == 0 or c0 == 0 or r0 == n or c0 == n:
        return TestResult(1.0, "exact")

    def logp(x: int) -> float:
        return _log_comb(c0, x) + _log_comb(n - c0, r0 - x) - _log_comb(n, r0)

    logp_obs = logp(a)
    bound = logp_obs + math.log1p(REL_TOL)
    lo = max(0, r0 - (n - c0))
    hi = min(r0, c0)
    included = [x for x in range(lo, hi + 1) if logp(x) <= bound]
    if len(included) == hi - lo + 1:
        return TestResult(1.0, "exact")  # whole support: exactly 1
    p = sum(math.exp(logp(x)) for x in included)
    return TestResult(min(1.0, p), "exact")


def fisher_mc(table, iterations: int, seed) -> TestResult:
    """Monte-Carlo Fisher test for an r x c table.

    Draws ``iterations`` tables from the fixed-margin null (sequential
    hypergeometric fill), ranks them by table probability, and reports
    p = (x + 1) / (B + 1) where x tables are no more probable than the
    observed one.  The +1 terms keep p off zero: the smallest reachable
    value is 1/(B+1).
    """
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] < 2 or t.shape[1] < 2:
        raise ValueError("need a table with at least 2 rows and 2 columns")
    if (t < 0).any() or t.sum() == 0:
        raise ValueError("table must be nonnegative with a positive total")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    generator = np.random.default_rng(seed)
    x = kernels.mc_extreme_count(t, iterations, generator)
    return TestResult(
        (x + 1) / (iterations + 1), "monte_carlo", iterations=iterations, seed=seed
    )


def posthoc_pairwise(ct: Crosstab) -> list[tuple[tuple, tuple, float]]:
    """Exact 2x2 tests for every row pair x column pair, Bonferroni-corrected.

    The multiplier is the number of tests, C(R,2) * C(C,2); corrected values
    clamp at 1.
    """
    counts = ct.counts
    r, c = counts.shape
    if r < 2 or c < 2:
        raise ValueError("post-hoc analysis needs at least a 2x2 crosstab")
    m = math.comb(r, 2) * math.comb(c, 2)
    results = []
    for i1, i2 in combinations(range(r), 2):
        for j1, j2 in combinations(range(c), 2):
            sub = counts[np.ix_((i1, i2), (j1, j2))]
            raw = fisher_exact_2x2(sub).p
            results.append(
                (
                    (ct.row_labels[i1], ct.row_labels[i2]),
                    (ct.col_labels[j1], ct.col_labels[j2]),
                    min(1.0, raw * m),
                )
            )
    return results


def bonferroni_factor(ct: Crosstab) -> int:
    """Number of pairwise tests behind posthoc_pairwise's correction."""
    r, c = ct.counts.shape
    return math.comb(r, 2) * math.comb(c, 2)


def write_crosstab_csv(ct: Crosstab, path) -> None:
    """CSV export: column labels as header, row label first in each row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [str(lab) for lab in ct.col_labels])
        for label, row in zip(ct.row_labels, ct.counts):
            writer.writerow([str(label)] + [int(v) for v in row])
