"""Shared fixtures: the 14x14 overlap table between two acquisition runs."""

import numpy as np
import pytest

from modoma.stats import Crosstab

# Crosstabulation of the category overlap between two independent 14-category
# acquisition runs over a shared Dutch lexicon.  Rows: categories of the
# second (test) run; columns: categories of the first (training) run.
OVERLAP_LABELS = [f"A:{chr(ord('a') + i)}" for i in range(14)]

OVERLAP_COUNTS = np.array(
    [
        [3, 12, 0, 0, 1, 8, 5, 0, 2, 0, 0, 1, 1, 0],
        [0, 23, 0, 0, 0, 2, 1, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, 2, 0, 0, 0, 0, 4, 0, 0, 0, 0, 1],
        [0, 0, 1, 3, 0, 0, 0, 0, 0, 0, 4, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0, 0, 2, 1, 0, 0, 0],
        [0, 0, 0, 0, 33, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 7, 0, 0, 0, 0, 0, 7, 0],
        [0, 0, 0, 1, 0, 1, 1, 0, 7, 0, 0, 0, 0, 2],
        [0, 0, 0, 0, 0, 3, 1, 30, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 8, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 2, 1, 0, 0, 0, 1, 7, 0, 0],
        [9, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 11, 0, 0],
    ],
    dtype=np.int64,
)


def overlap_crosstab() -> Crosstab:
    return Crosstab(list(OVERLAP_LABELS), list(OVERLAP_LABELS), OVERLAP_COUNTS.copy())


def assignments_realizing(counts, row_labels, col_labels):
    """Synthesize two token->category assignments whose crosstab is `counts`."""
    a, b = {}, {}
    serial = 0
    for i, rl in enumerate(row_labels):
        for j, cl in enumerate(col_labels):
            for _ in range(int(counts[i, j])):
                token = f"tok{serial}"
                serial += 1
                a[token] = rl
                b[token] = cl
    return a, b


@pytest.fixture
def overlap_table():
    return overlap_crosstab()


# Weighted toy language with three airtight distributional classes; small
# enough that a session over a few hundred utterances recovers them exactly.
THREE_CLASS_SPEC = """\
# determiner + noun + verb, all weights equal
START S
RULE S -> D N V @1
WORD D de @1
WORD D een @1
WORD N kat @1
WORD N hond @1
WORD V slaapt @1
WORD V rent @1
"""

THREE_CLASS_PARTITION = [{"de", "een"}, {"hond", "kat"}, {"rent", "slaapt"}]


@pytest.fixture
def spec_path(tmp_path):
    path = tmp_path / "toy.grammar"
    path.write_text(THREE_CLASS_SPEC, encoding="utf-8")
    return path
