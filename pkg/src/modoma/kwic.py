"""Keyword-in-context extraction and the thresholded co-occurrence table.

Every corpus token yields one KWIC record pairing it with the tokens at
relative positions -before..-1 and +1..+after inside the same utterance.
The records are tallied into a rectangular target x (context word, position)
count matrix, zero-filled for unattested combinations, which is the input
to the clustering stage.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError

# sentence punctuation stripped off token edges; apostrophes stay ("massa's")
EDGE_PUNCT = ".,!?;:"


def tokenize(raw: str) -> list[str]:
    """Whitespace-split a line, trimming sentence punctuation from token edges.

    Case is preserved; tokens that are punctuation only are dropped.
    """
    tokens = []
    for chunk in raw.split():
        tok = chunk.strip(EDGE_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


@dataclass
class KwicRecord:
    """One corpus token with its windowed context.

    ``context`` maps relative position (never 0) to the token there; positions
    that fall outside the utterance are absent.
    """

    target: str
    context: dict[int, str] = field(default_factory=dict)


@dataclass
class ContextFrequencyTable:
    """Rectangular count matrix: targets x (context token, relative position).

    Row and column orders are deterministic (lexicographic, position
    ascending) so that repeated builds over permuted records are identical.
    """

    targets: list[str]
    columns: list[tuple[str, int]]
    counts: np.ndarray  # shape (len(targets), len(columns)), int64

    def column_labels(self) -> list[str]:
        return [f"{tok}@{pos:+d}" for tok, pos in self.columns]

    def __eq__(self, other):
        if not isinstance(other, ContextFrequencyTable):
            return NotImplemented
        return (
            self.targets == other.targets
            and self.columns == other.columns
            and np.array_equal(self.counts, other.counts)
        )


def _tokens_of(utterance) -> list[str]:
    # accepts Utterance objects or plain token sequences
    return list(getattr(utterance, "tokens", utterance))


def extract_kwic(utterances, before: int = 2, after: int = 2) -> list[KwicRecord]:
    """One record per corpus token; windows never cross utterance boundaries."""
    if before < 0 or after < 0:
        raise ValueError("window sizes must be >= 0")
    if before == 0 and after == 0:
        raise ValueError("window must cover at least one context position")
    records = []
    for utt in utterances:
        tokens = _tokens_of(utt)
        n = len(tokens)
        for i, target in enumerate(tokens):
            context = {}
            for off in range(-before, after + 1):
                if off == 0:
                    continue
                j = i + off
                if 0 <= j < n:
                    context[off] = tokens[j]
            records.append(KwicRecord(target, context))
    return records


def build_frequency_table(
    records: list[KwicRecord], min_freq: int = 10, min_col_freq: int = 0
) -> ContextFrequencyTable:
    """Tally records into the zero-filled frequency table.

    Rows are the target words whose total corpus frequency is >= ``min_freq``
    (each token produces exactly one record, so record counts are corpus
    frequencies).  Columns are every (token, position) pair attested in the
    retained rows; ``min_col_freq`` optionally drops low-total columns.
    """
    if min_freq < 0 or min_col_freq < 0:
        raise ValueError("frequency thresholds must be >= 0")
    totals = Counter(r.target for r in records)
    targets = sorted(t for t, c in totals.items() if c >= min_freq)
    if len(targets) < 2:
        raise InsufficientDataError(
            f"only {len(targets)} target(s) at min_freq={min_freq}; need >= 2 to cluster"
        )
    keep = set(targets)
    pair_counts: Counter[tuple[str, str, int]] = Counter()
    for rec in records:
        if rec.target not in keep:
            continue
        for pos, tok in rec.context.items():
            pair_counts[(rec.target, tok, pos)] += 1
    columns = sorted({(tok, pos) for (_, tok, pos) in pair_counts})
    row_of = {t: i for i, t in enumerate(targets)}
    col_of = {c: j for j, c in enumerate(columns)}
    counts = np.zeros((len(targets), len(columns)), dtype=np.int64)
    for (target, tok, pos), c in pair_counts.items():
        counts[row_of[target], col_of[(tok, pos)]] = c
    if min_col_freq > 0 and len(columns) > 0:
        mask = counts.sum(axis=0) >= min_col_freq
        columns = [c for c, m in zip(columns, mask) if m]
        counts = counts[:, mask]
    return ContextFrequencyTable(targets, columns, counts)


def write_kwic_csv(records: list[KwicRecord], path, before: int = 2, after: int = 2) -> None:
    """CSV export with header target,pos-<before>..pos+<after> (0 omitted)."""
    positions = [p for p in range(-before, after + 1) if p != 0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target"] + [f"pos{p:+d}" for p in positions])
        for rec in records:
            writer.writerow([rec.target] + [rec.context.get(p, "") for p in positions])


def write_table_csv(table: ContextFrequencyTable, path) -> None:
    """CSV export: first column target, remaining columns token@position."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target"] + table.column_labels())
        for i, target in enumerate(table.targets):
            writer.writerow([target] + [int(c) for c in table.counts[i]])
