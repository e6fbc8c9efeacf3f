"""End-to-end category acquisition.

Runs the context-statistics pipeline over a corpus, allocates a fresh
feature label, and writes each cluster into the grammar as a feature-value
pair on every member token's entry, creating entries for tokens the grammar
has not stored yet.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .cluster import agglomerate_complete_link, cut, spearman_matrix, to_distance
from .errors import InsufficientDataError
from .kwic import build_frequency_table, extract_kwic
from .labels import capital_label, lower_label


@dataclass(frozen=True)
class AcquisitionParams:
    before: int = 2
    after: int = 2
    min_freq: int = 10
    k: int = 14
    confidence: int = 60
    min_corpus: int = 10000


def defaults() -> AcquisitionParams:
    """The standard run settings: 2-2 window, threshold 10, 14 clusters,
    confidence 60, and at least 10,000 utterances of exposure."""
    return AcquisitionParams()


@dataclass
class PipelineResult:
    """Every intermediate artifact of one pipeline run, for logging."""

    records: list
    table: object
    correlation: object
    distance: object
    dendrogram: object
    assignment: dict[str, int]


@dataclass
class AcquisitionReport:
    """Programmatic form of one acquisition outcome.

    ``clusters`` maps value labels (a, b, ... in cluster-id order) to their
    member tokens; ``parameters`` records the run settings plus corpus size.
    """

    feature: str
    clusters: dict[str, list[str]]
    parameters: dict
    created_entries: int
    updated_entries: int

    def assignment(self) -> dict[str, str]:
        """Token -> "feature:value", the comparable category labeling."""
        return {
            token: f"{self.feature}:{value}"
            for value, tokens in self.clusters.items()
            for token in tokens
        }

    def to_json_obj(self) -> dict:
        return {
            "feature": self.feature,
            "parameters": dict(self.parameters),
            "created_entries": self.created_entries,
            "updated_entries": self.updated_entries,
            "clusters": [
                {
                    "number": i,
                    "feature": self.feature,
                    "value": value,
                    "words": list(tokens),
                }
                for i, (value, tokens) in enumerate(self.clusters.items(), start=1)
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AcquisitionReport":
        return cls(
            feature=obj["feature"],
            clusters={c["value"]: list(c["words"]) for c in obj["clusters"]},
            parameters=dict(obj["parameters"]),
            created_entries=obj["created_entries"],
            updated_entries=obj["updated_entries"],
        )


def run_pipeline(corpus, params: AcquisitionParams) -> PipelineResult:
    """Corpus -> windows -> table -> correlation -> distance -> tree -> cut."""
    if len(corpus) < params.min_corpus:
        raise InsufficientDataError(
            f"corpus has {len(corpus)} utterances, need >= {params.min_corpus}"
        )
    records = extract_kwic(corpus, params.before, params.after)
    table = build_frequency_table(records, params.min_freq)
    correlation = spearman_matrix(table)
    if len(correlation.labels) < params.k:
        raise InsufficientDataError(
            f"only {len(correlation.labels)} clusterable targets, need >= {params.k}"
        )
    distance = to_distance(correlation)
    dendrogram = agglomerate_complete_link(distance)
    assignment = cut(dendrogram, params.k)
    return PipelineResult(records, table, correlation, distance, dendrogram, assignment)


def allocate_feature(grammar) -> str:
    """First capital label (A, B, ..., Z, AA, ...) not used by any entry."""
    used = grammar.features_in_use()
    i = 0
    while capital_label(i) in used:
        i += 1
    return capital_label(i)


def record_categories(
    grammar,
    assignment: dict[str, int],
    feature: str,
    confidence: int,
    session: int = 0,
) -> tuple[dict[str, list[str]], int, int]:
    """Write cluster membership into the grammar as (feature, value) pairs.

    Cluster i becomes value label lower_label(i-1).  Tokens without entries
    get fresh terminals first; a token whose entry already holds a different
    value for this feature is overwritten through the logged path.
    """
    k = max(assignment.values(), default=0)
    clusters: dict[str, list[str]] = {lower_label(i): [] for i in range(k)}
    for token in sorted(assignment):
        clusters[lower_label(assignment[token] - 1)].append(token)
    created = updated = 0
    for value, tokens in clusters.items():
        for token in tokens:
            entries = grammar.entries_for(token)
            if not entries:
                entries = [
                    grammar.new_entry(token, session, grammar.next_number(session))
                ]
                created += 1
            else:
                updated += len(entries)
            for entry in entries:
                existing = entry.get_property(feature)
                if existing is not None and existing.property_value != value:
                    grammar.overwrite_property(entry, feature, value, confidence)
                else:
                    grammar.set_property(entry, feature, value, confidence)
    return clusters, created, updated


def acquire_categories(
    grammar,
    corpus,
    params: AcquisitionParams | None = None,
    feature: str | None = None,
    session: int = 0,
    pipeline: PipelineResult | None = None,
) -> AcquisitionReport:
    """Full acquisition transaction; allocates a fresh feature when none given.

    Callers that need the intermediate tables pass a precomputed pipeline
    result; it must come from the same corpus and parameters.
    """
    params = params or defaults()
    if pipeline is None:
        pipeline = run_pipeline(corpus, params)
    feature = feature or allocate_feature(grammar)
    clusters, created, updated = record_categories(
        grammar, pipeline.assignment, feature, params.confidence, session
    )
    parameters = asdict(params)
    parameters["corpus_size"] = len(corpus)
    return AcquisitionReport(feature, clusters, parameters, created, updated)
