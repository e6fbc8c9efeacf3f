"""Distance construction and complete-link clustering of the context table.

Rows of the frequency table are rank-correlated (Spearman with average tie
ranks), correlations are squared so that strong negative association counts
as similarity, and d = 1 - rho^2 feeds a complete-link agglomeration whose
tree can be cut into k groups and exported as Newick, SVG, or JSON.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import InsufficientDataError
from . import kernels

log = logging.getLogger(__name__)


@dataclass
class LabeledMatrix:
    """Square matrix with one label per row/column (correlations, distances)."""

    labels: list[str]
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, LabeledMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.values, other.values)


@dataclass
class Dendrogram:
    """Binary merge tree: leaves plus (left, right, height) records.

    Node ids follow the usual convention: leaf i is node i, the cluster made
    by merge t is node len(leaves) + t.  In each merge the left node is the
    cluster containing the smallest original leaf index.  Heights are
    nondecreasing.
    """

    leaves: list[str]
    merges: list[tuple[int, int, float]]


def spearman_matrix(table) -> LabeledMatrix:
    """Pairwise Spearman correlation of the table's rows.

    Ranks use average ties; the coefficient is the Pearson correlation of the
    rank vectors, which is the correct form under ties.  All-zero rows are
    dropped with a warning (they carry no context evidence); rows that are
    constant but nonzero stay, with rho = 0 against everything.
    """
    counts = np.asarray(table.counts, dtype=np.float64)
    labels = list(table.targets)
    if counts.shape[0] < 2 or counts.shape[1] < 2:
        raise InsufficientDataError("need at least 2 rows and 2 columns to correlate")
    nonzero = counts.any(axis=1)
    if not nonzero.all():
        dropped = [t for t, keep in zip(labels, nonzero) if not keep]
        log.warning("dropping %d all-zero row(s) before correlation: %s",
                    len(dropped), ", ".join(dropped))
        labels = [t for t, keep in zip(labels, nonzero) if keep]
        counts = counts[nonzero]
    if counts.shape[0] < 2:
        raise InsufficientDataError("fewer than 2 nonzero rows left to correlate")
    ranks = rankdata(counts, method="average", axis=1)
    centered = ranks - ranks.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=1))
    varying = norms > 0
    z = centered / np.where(varying, norms, 1.0)[:, None]
    corr = z @ z.T
    corr[~varying, :] = 0.0
    corr[:, ~varying] = 0.0
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return LabeledMatrix(labels, corr)


def to_distance(corr: LabeledMatrix) -> LabeledMatrix:
    """d = 1 - rho^2, so sign-blind association strength becomes closeness."""
    d = 1.0 - np.asarray(corr.values, dtype=np.float64) ** 2
    np.clip(d, 0.0, 1.0, out=d)
    np.fill_diagonal(d, 0.0)
    return LabeledMatrix(list(corr.labels), d)


def agglomerate_complete_link(dist: LabeledMatrix) -> Dendrogram:
    """Merge the closest pair (by maximum pairwise distance) until one cluster.

    Equal-distance ties break toward the pair whose clusters hold the
    smallest original leaf indices, keeping the sequence platform-independent.
    """
    values = np.asarray(dist.values, dtype=np.float64)
    n = values.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least 2 leaves to agglomerate")
    if not np.isfinite(values).all():
        raise ValueError("distance matrix contains non-finite values")
    merges = kernels.complete_link(values)
    return Dendrogram(
        list(dist.labels),
        [(int(a), int(b), float(h)) for a, b, h, _ in merges],
    )


def cut(dendrogram: Dendrogram, k: int) -> dict[str, int]:
    """Partition leaves into k clusters by undoing the last k-1 merges.

    Returns label -> cluster id; ids are 1..k in order of each cluster's
    first leaf in the dendrogram's leaf ordering.
    """
    n = len(dendrogram.leaves)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    for t, (a, b, _) in enumerate(dendrogram.merges[: n - k]):
        members[n + t] = members.pop(a) + members.pop(b)
    clusters = sorted(members.values(), key=min)
    assignment = {}
    for cid, leaf_ids in enumerate(clusters, start=1):
        for i in leaf_ids:
            assignment[dendrogram.leaves[i]] = cid
    return assignment


def _fmt(x: float) -> str:
    return f"{x:.12g}"


_NEWICK_UNSAFE = set(" \t\n(),:;'\"[]")


def _newick_label(label: str) -> str:
    if any(c in _NEWICK_UNSAFE for c in label):
        return "'" + label.replace("'", "''") + "'"
    return label


def to_newick(dendrogram: Dendrogram) -> str:
    """Nested-parentheses serialization; branch length = height difference."""
    n = len(dendrogram.leaves)
    heights = {i: 0.0 for i in range(n)}
    children = {}
    for t, (a, b, h) in enumerate(dendrogram.merges):
        children[n + t] = (a, b)
        heights[n + t] = h

    def render(node: int) -> str:
        if node < n:
            return _newick_label(dendrogram.leaves[node])
        a, b = children[node]
        h = heights[node]
        return (
            f"({render(a)}:{_fmt(h - heights[a])},"
            f"{render(b)}:{_fmt(h - heights[b])})"
        )

    root = n + len(dendrogram.merges) - 1 if dendrogram.merges else 0
    return render(root) + ";"


def to_json(dendrogram: Dendrogram) -> str:
    """Leaves plus the merge list verbatim; loadable by dendrogram_from_json."""
    return json.dumps(
        {
            "leaves": list(dendrogram.leaves),
            "merges": [[a, b, h] for a, b, h in dendrogram.merges],
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def dendrogram_from_json(text: str) -> Dendrogram:
    obj = json.loads(text)
    return Dendrogram(
        [str(leaf) for leaf in obj["leaves"]],
        [(int(a), int(b), float(h)) for a, b, h in obj["merges"]],
    )


def to_svg(dendrogram: Dendrogram, width: int = 720, row_height: int = 22) -> str:
    """Left-to-right tree: root at the left, leaves labeled on the right,
    horizontal position proportional to merge height."""
    n = len(dendrogram.leaves)
    heights = {i: 0.0 for i in range(n)}
    children = {}
    for t, (a, b, h) in enumerate(dendrogram.merges):
        children[n + t] = (a, b)
        heights[n + t] = h
    root = n + len(dendrogram.merges) - 1 if dendrogram.merges else 0
    max_h = max(heights[root], 1e-12)

    # leaf order by left-first traversal; y positions stack downward
    order: list[int] = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node < n:
            order.append(node)
        else:
            a, b = children[node]
            stack.extend([b, a])
    margin, label_gap = 30, 8
    plot_w = width - 2 * margin - 120  # room for labels at the right
    total_h = 2 * margin + row_height * max(len(order), 1)
    ys = {leaf: margin + row_height * (i + 0.5) for i, leaf in enumerate(order)}

    def x_of(node: int) -> float:
        return margin + plot_w * (1.0 - heights[node] / max_h)

    lines, labels = [], []

    def draw(node: int) -> float:
        if node < n:
            labels.append(
                f'<text x="{x_of(node) + label_gap:.2f}" y="{ys[node] + 4:.2f}" '
                f'font-size="12" font-family="monospace">{_xml(dendrogram.leaves[node])}</text>'
            )
            return ys[node]
        a, b = children[node]
        ya, yb = draw(a), draw(b)
        x = x_of(node)
        lines.append(_line(x, ya, x, yb))
        lines.append(_line(x, ya, x_of(a), ya))
        lines.append(_line(x, yb, x_of(b), yb))
        return (ya + yb) / 2.0

    draw(root)
    axis_y = total_h - margin / 2
    axis = [_line(margin, axis_y, margin + plot_w, axis_y)]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = margin + plot_w * frac
        axis.append(_line(x, axis_y - 3, x, axis_y + 3))
        axis.append(
            f'<text x="{x:.2f}" y="{axis_y + 14:.2f}" font-size="10" '
            f'text-anchor="middle" font-family="monospace">{_fmt(max_h * (1 - frac))}</text>'
        )
    body = "\n".join(lines + labels + axis)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_h}" '
        f'viewBox="0 0 {width} {total_h}">\n{body}\n</svg>\n'
    )


def _line(x1, y1, x2, y2) -> str:
    return (
        f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
        f'stroke="black" stroke-width="1"/>'
    )


def _xml(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def export_dendrogram(dendrogram: Dendrogram, format: str, path=None) -> str:
    """Serialize to 'newick', 'svg', or 'json'; optionally write to path."""
    if format == "newick":
        out = to_newick(dendrogram) + "\n"
    elif format == "svg":
        out = to_svg(dendrogram)
    elif format == "json":
        out = to_json(dendrogram) + "\n"
    else:
        raise ValueError(f"unknown dendrogram format: {format!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(out)
    return out


def write_matrix_csv(matrix: LabeledMatrix, path) -> None:
    """Square matrix CSV with labels in the first row and first column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + matrix.labels)
        for label, row in zip(matrix.labels, matrix.values):
            writer.writerow([label] + [repr(float(v)) for v in row])
