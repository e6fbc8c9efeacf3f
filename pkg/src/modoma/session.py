"""The laboratory shell: configured runs, exhaustive logs, and comparisons.

One run reads or generates a corpus, performs acquisition into a fresh
grammar, writes every artifact under <out>/<session id>, and appends an
NDJSON log with a record for every utterance, artifact, judgment, and
result.  A logged config replays to byte-identical artifacts.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .acquisition import AcquisitionParams, AcquisitionReport, acquire_categories, run_pipeline
from .cluster import export_dendrogram, write_matrix_csv
from .errors import ConfigError, DataError, ModomaError
from .grammar import Grammar
from .kwic import write_kwic_csv, write_table_csv
from .mother import generate_utterances, ingest_corpus, load_generator
from .stats import bonferroni_factor, crosstab, fisher_mc, posthoc_pairwise, write_crosstab_csv

DEFAULT_MC_ITERATIONS = 500_000
EXCHANGE_MAX_LEN = 8

_INT_FIELDS = (
    "session_id",
    "utterances",
    "seed",
    "window_before",
    "window_after",
    "min_freq",
    "clusters",
    "confidence",
    "min_corpus",
    "mc_iterations",
    "mc_seed",
    "exchange_turns",
)
_STR_FIELDS = ("corpus", "grammar_spec", "out", "mode", "reference")


@dataclass(frozen=True)
class SessionConfig:
    """Everything one experiment needs; replayable as written."""

    corpus: str | None = None
    grammar_spec: str | None = None
    session_id: int | None = None  # assigned from the clock when absent
    utterances: int = 10000
    seed: int = 0
    window_before: int = 2
    window_after: int = 2
    min_freq: int = 10
    clusters: int = 14
    confidence: int = 60
    min_corpus: int = 10000
    mc_iterations: int = DEFAULT_MC_ITERATIONS
    mc_seed: int | None = None  # defaults to seed
    out: str = "runs"
    mode: str = "acquire-only"
    exchange_turns: int = 5
    reference: str | None = None

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SessionConfig":
        values = {}
        for key, value in mapping.items():
            if value is None:
                continue
            if key in _INT_FIELDS:
                try:
                    values[key] = int(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"{key} must be an integer, got {value!r}") from None
            elif key in _STR_FIELDS:
                values[key] = str(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        if (self.corpus is None) == (self.grammar_spec is None):
            raise ConfigError("exactly one of corpus or grammar_spec is required")
        if self.utterances < 1:
            raise ConfigError("utterances must be >= 1")
        if self.window_before < 0 or self.window_after < 0:
            raise ConfigError("window sizes must be >= 0")
        if self.window_before == 0 and self.window_after == 0:
            raise ConfigError("window must cover at least one position")
        if self.min_freq < 0:
            raise ConfigError("min_freq must be >= 0")
        if self.clusters < 1:
            raise ConfigError("clusters must be >= 1")
        if not 0 <= self.confidence <= 100:
            raise ConfigError("confidence must be within 0..100")
        if self.min_corpus < 1:
            raise ConfigError("min_corpus must be >= 1")
        if self.mc_iterations < 1:
            raise ConfigError("mc_iterations must be >= 1")
        if self.exchange_turns < 0:
            raise ConfigError("exchange_turns must be >= 0")
        if self.mode not in ("acquire-only", "exchange"):
            raise ConfigError(f"mode must be acquire-only or exchange, not {self.mode!r}")
        if not self.out:
            raise ConfigError("out directory must be nonempty")

    def to_json_obj(self) -> dict:
        return asdict(self)


def _parse_key_values(text: str) -> dict:
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"config line {lineno}: expected key=value")
        mapping[key.strip()] = value.strip()
    return mapping


def load_config_mapping(path) -> dict:
    """Read a config file: JSON when it looks like JSON, else key=value lines."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    stripped = text.lstrip()
    if str(path).endswith(".json") or stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("JSON config must be an object")
        return obj
    return _parse_key_values(text)


_last_session_id = 0


def next_session_id() -> int:
    """Milliseconds since epoch, forced strictly increasing in-process."""
    global _last_session_id
    now = time.time_ns() // 1_000_000
    _last_session_id = max(now, _last_session_id + 1)
    return _last_session_id


@dataclass
class SessionLog:
    directory: Path
    config: SessionConfig
    records: list[dict]
    report: AcquisitionReport | None


class _LogWriter:
    def __init__(self, path: Path):
        self.path = path
        self.records: list[dict] = []
        self._fh = open(path, "a", encoding="utf-8")

    def write(self, kind: str, **payload) -> None:
        record = {"kind": kind, "ts": time.time_ns() // 1_000_000, **payload}
        self.records.append(record)
        self._fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _dump_json(obj, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def run_experiment(config: SessionConfig) -> SessionLog:
    """Execute one full session; every step lands in the NDJSON log."""
    config.validate()
    session_id = config.session_id if config.session_id is not None else next_session_id()
    mc_seed = config.mc_seed if config.mc_seed is not None else config.seed
    resolved = replace(config, session_id=session_id, mc_seed=mc_seed)
    outdir = Path(resolved.out) / str(session_id)
    outdir.mkdir(parents=True, exist_ok=True)
    log = _LogWriter(outdir / "session.log")
    try:
        log.write("parameters", config=resolved.to_json_obj())
        _dump_json(resolved.to_json_obj(), outdir / "config.json")

        if resolved.corpus is not None:
            corpus = ingest_corpus(resolved.corpus, session_id)
        else:
            model = load_generator(resolved.grammar_spec)
            corpus = generate_utterances(
                model, resolved.utterances, resolved.seed, session_id
            )
        for utt in corpus:
            log.write("utterance", source=utt.source, index=utt.index,
                      tokens=list(utt.tokens))

        grammar = Grammar()
        grammar.save(outdir / "grammar_before.json")
        params = AcquisitionParams(
            before=resolved.window_before,
            after=resolved.window_after,
            min_freq=resolved.min_freq,
            k=resolved.clusters,
            confidence=resolved.confidence,
            min_corpus=resolved.min_corpus,
        )
        pipeline = run_pipeline(corpus, params)
        report = acquire_categories(
            grammar, corpus, params, session=session_id, pipeline=pipeline
        )
        grammar.save(outdir / "grammar_after.json")

        write_kwic_csv(pipeline.records, outdir / "kwic.csv",
                       params.before, params.after)
        write_table_csv(pipeline.table, outdir / "table.csv")
        write_matrix_csv(pipeline.distance, outdir / "distance.csv")
        export_dendrogram(pipeline.dendrogram, "json", outdir / "dendrogram.json")
        _dump_json(report.to_json_obj(), outdir / "report.json")
        for name in ("grammar_before.json", "kwic.csv", "table.csv", "distance.csv",
                     "dendrogram.json", "report.json", "grammar_after.json"):
            log.write("artifact", name=name, path=str(outdir / name))
        log.write("report", report=report.to_json_obj())
        for change in grammar.change_log:
            log.write("grammar_change", **change)

        if resolved.mode == "exchange":
            _exchange_turns(log, grammar, corpus, resolved)

        if resolved.reference is not None:
            results = _compare_against_reference(outdir, report, resolved)
            log.write("statistics", results=results)

        return SessionLog(outdir, resolved, log.records, report)
    except ModomaError as exc:
        log.write("error", error=type(exc).__name__, message=str(exc))
        raise
    finally:
        log.close()


def _exchange_turns(log: _LogWriter, grammar: Grammar, corpus, config: SessionConfig) -> None:
    """Daughter speaks, mother input is judged and annotated; feedback is a
    logged no-op because no feedback mechanism is configured."""
    for turn in range(config.exchange_turns):
        tokens = grammar.generate(EXCHANGE_MAX_LEN, config.seed * 10007 + turn + 1)
        log.write("utterance", source="daughter", index=turn, tokens=tokens)
        heard = corpus[turn % len(corpus)]
        result = grammar.parse(heard.tokens)
        log.write("judgment", source="mother", index=heard.index,
                  judgment=result.judgment,
                  derivations=len(result.derivations))
        annotation = grammar.annotate(heard.tokens)
        labels = [
            [token, None if pairs is None else [[f, v] for f, v in pairs]]
            for token, pairs in annotation
        ]
        log.write("annotation", source="mother", index=heard.index, labels=labels)
        log.write("feedback", turn=turn, status="noop")


def _statistics_results(report_rows: AcquisitionReport,
                        report_cols: AcquisitionReport,
                        mc_iterations: int, seed) -> tuple[dict, object]:
    ct = crosstab(report_rows.assignment(), report_cols.assignment())
    if ct.counts.shape[0] < 2 or ct.counts.shape[1] < 2:
        raise DataError("need at least 2 categories on each side to compare")
    overall = fisher_mc(ct.counts, mc_iterations, seed)
    pairs = posthoc_pairwise(ct)
    results = {
        "method": overall.method,
        "p": overall.p,
        "iterations": overall.iterations,
        "seed": overall.seed,
        "correction": bonferroni_factor(ct),
        "pairs": [
            {"rows": list(rows), "cols": list(cols), "p": p}
            for rows, cols, p in pairs
        ],
        "crosstab": {
            "rows": list(ct.row_labels),
            "cols": list(ct.col_labels),
            "counts": ct.counts.tolist(),
        },
    }
    return results, ct


def _compare_against_reference(outdir: Path, report: AcquisitionReport,
                               config: SessionConfig) -> dict:
    reference = _load_report(Path(config.reference))
    results, ct = _statistics_results(report, reference,
                                      config.mc_iterations, config.mc_seed)
    _dump_json(results, outdir / "statistics.json")
    write_crosstab_csv(ct, outdir / "crosstab.csv")
    return results


def _load_report(path: Path) -> AcquisitionReport:
    if path.is_dir():
        path = path / "report.json"
    if not path.is_file():
        raise DataError(f"no acquisition report at {path}")
    with open(path, encoding="utf-8") as fh:
        return AcquisitionReport.from_json_obj(json.load(fh))


def compare_sessions(dir_a, dir_b, mc_iterations: int = DEFAULT_MC_ITERATIONS,
                     seed=0) -> dict:
    """Crosstab + Monte-Carlo Fisher + post-hoc over two sessions' categories.

    The first session provides the rows.  Results are written into both
    session directories and appended to both logs.
    """
    dir_a, dir_b = Path(dir_a), Path(dir_b)
    report_a = _load_report(dir_a)
    report_b = _load_report(dir_b)
    results, ct = _statistics_results(report_a, report_b, mc_iterations, seed)
    for directory, other in ((dir_a, dir_b), (dir_b, dir_a)):
        if directory.is_dir():
            _dump_json(results, directory / "comparison.json")
            write_crosstab_csv(ct, directory / "crosstab.csv")
            log = _LogWriter(directory / "session.log")
            log.write("comparison", other=str(other), results=results)
            log.close()
    return results
