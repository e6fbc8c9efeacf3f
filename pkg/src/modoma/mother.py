"""The sample-producing agent: a weighted-grammar generator or a corpus file.

The generator is a stand-in for a full adult language model: a start symbol,
weighted expansion rules, and weighted class lexicons.  Each lexicon token
carries a ground-truth category label that only test oracles may read; the
learning agent never sees it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import DataError, GenerationError, GrammarSpecError
from .kwic import tokenize

MAX_DEPTH = 64
MAX_RETRIES = 1000


@dataclass(frozen=True)
class Utterance:
    """One exchanged sentence with its provenance."""

    tokens: tuple[str, ...]
    source: str = "mother"
    session_id: int = 0
    index: int = 0


@dataclass
class GeneratorModel:
    """Weighted grammar: rules per nonterminal, token lexicon per class."""

    rules: list[tuple[str, tuple[str, ...], float]]
    lexicon: dict[str, list[tuple[str, float]]]
    start: str
    categories: dict[str, str] = field(default_factory=dict)


class _DepthExceeded(Exception):
    pass


def _parse_weight(text: str, lineno: int) -> float:
    if not text.startswith("@"):
        raise GrammarSpecError(f"line {lineno}: expected trailing @<weight>, got {text!r}")
    try:
        weight = float(text[1:])
    except ValueError:
        raise GrammarSpecError(f"line {lineno}: bad weight {text[1:]!r}") from None
    if not weight >= 0 or weight != weight or weight == float("inf"):
        raise GrammarSpecError(f"line {lineno}: weight must be finite and >= 0")
    return weight


def parse_generator_spec(text: str) -> GeneratorModel:
    """Parse the line-oriented grammar-spec format.

    Directives: RULE <LHS> -> <RHS...> @<weight>, WORD <class> <token>
    @<weight>, START <symbol>, CAT <token> <label>; '#' starts a comment.
    """
    rules: list[tuple[str, tuple[str, ...], float]] = []
    lexicon: dict[str, list[tuple[str, float]]] = {}
    categories: dict[str, str] = {}
    start = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        keyword = fields[0]
        if keyword == "RULE":
            if len(fields) < 5 or fields[2] != "->":
                raise GrammarSpecError(
                    f"line {lineno}: expected RULE <LHS> -> <RHS...> @<weight>"
                )
            weight = _parse_weight(fields[-1], lineno)
            rules.append((fields[1], tuple(fields[3:-1]), weight))
        elif keyword == "WORD":
            if len(fields) != 4:
                raise GrammarSpecError(
                    f"line {lineno}: expected WORD <class> <token> @<weight>"
                )
            weight = _parse_weight(fields[3], lineno)
            lexicon.setdefault(fields[1], []).append((fields[2], weight))
        elif keyword == "START":
            if len(fields) != 2:
                raise GrammarSpecError(f"line {lineno}: expected START <symbol>")
            if start is not None:
                raise GrammarSpecError(f"line {lineno}: duplicate START")
            start = fields[1]
        elif keyword == "CAT":
            if len(fields) != 3:
                raise GrammarSpecError(f"line {lineno}: expected CAT <token> <label>")
            categories[fields[1]] = fields[2]
        else:
            raise GrammarSpecError(f"line {lineno}: unknown directive {keyword!r}")
    if start is None:
        raise GrammarSpecError("missing START directive")
    model = GeneratorModel(rules, lexicon, start, categories)
    _validate(model)
    return model


def _validate(model: GeneratorModel) -> None:
    rules_of: dict[str, list] = {}
    for lhs, rhs, _ in model.rules:
        rules_of.setdefault(lhs, []).append(rhs)
    defined = set(rules_of) | set(model.lexicon)
    # walk from the start symbol; every symbol used must be expandable
    seen = set()
    frontier = [model.start]
    while frontier:
        symbol = frontier.pop()
        if symbol in seen:
            continue
        seen.add(symbol)
        if symbol not in defined:
            raise GrammarSpecError(
                f"nonterminal {symbol!r} has no rule or lexicon entry"
            )
        for rhs in rules_of.get(symbol, []):
            frontier.extend(rhs)
    for symbol in seen:
        total = sum(w for lhs, _, w in model.rules if lhs == symbol)
        total += sum(w for _, w in model.lexicon.get(symbol, []))
        if not total > 0:
            raise GrammarSpecError(f"weights for {symbol!r} sum to {total}, need > 0")
    # fill ground-truth categories: a token's class is its default label
    owners: dict[str, set[str]] = {}
    for cls, entries in model.lexicon.items():
        for token, _ in entries:
            owners.setdefault(token, set()).add(cls)
    for token, classes in owners.items():
        if token in model.categories:
            continue
        if len(classes) > 1:
            raise GrammarSpecError(
                f"token {token!r} belongs to classes {sorted(classes)}; "
                "add a CAT line to fix its category"
            )
        model.categories[token] = next(iter(classes))


def load_generator(path) -> GeneratorModel:
    """Read and validate a grammar-spec file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise GrammarSpecError(f"cannot read generator spec: {exc}") from exc
    return parse_generator_spec(text)


def generate_utterances(model: GeneratorModel, n: int, seed, session_id: int = 0) -> list[Utterance]:
    """Sample n utterances; deterministic for a given (model, n, seed).

    Expansion is a weighted top-down walk with a recursion cap; a derivation
    that exceeds the cap is discarded and resampled, up to a retry budget.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    options: dict[str, tuple[list, list[float]]] = {}
    for lhs, rhs, w in model.rules:
        options.setdefault(lhs, ([], []))[0].append(("rule", rhs))
        options[lhs][1].append(w)
    for cls, entries in model.lexicon.items():
        for token, w in entries:
            options.setdefault(cls, ([], []))[0].append(("word", token))
            options[cls][1].append(w)

    def expand(symbol: str, depth: int) -> list[str]:
        if depth > MAX_DEPTH:
            raise _DepthExceeded
        population, weights = options[symbol]
        kind, payload = rng.choices(population, weights)[0]
        if kind == "word":
            return [payload]
        out: list[str] = []
        for part in payload:
            out.extend(expand(part, depth + 1))
        return out

    utterances = []
    for index in range(n):
        for _ in range(MAX_RETRIES):
            try:
                tokens = expand(model.start, 0)
                break
            except _DepthExceeded:
                continue
        else:
            raise GenerationError(
                f"no derivation within depth {MAX_DEPTH} after {MAX_RETRIES} tries"
            )
        utterances.append(Utterance(tuple(tokens), "mother", session_id, index))
    return utterances


def ingest_corpus(path, session_id: int = 0) -> list[Utterance]:
    """One utterance per nonempty line of a UTF-8 text file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read corpus: {exc}") from exc
    utterances = []
    for line in lines:
        tokens = tokenize(line)
        if tokens:
            utterances.append(
                Utterance(tuple(tokens), "mother", session_id, len(utterances))
            )
    if not utterances:
        raise DataError(f"corpus {path} contains no utterances")
    return utterances
