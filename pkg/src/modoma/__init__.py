"""modoma: a mother-daughter laboratory for first language acquisition.

A generating "mother" agent produces utterances from a weighted grammar; a
"daughter" agent induces grammatical categories from distributional context
statistics alone and writes them into its own unification grammar as
feature-value pairs.  Evaluation compares independent acquisition runs with
exact and Monte-Carlo contingency tests.
"""

from importlib import import_module

__version__ = "0.1.0"

# public name -> defining submodule, resolved lazily so that `import modoma`
# does not pull in scipy/numpy until a symbol is actually used
_EXPORTS = {
    "AcquisitionParams": "acquisition",
    "AcquisitionReport": "acquisition",
    "acquire_categories": "acquisition",
    "allocate_feature": "acquisition",
    "defaults": "acquisition",
    "run_pipeline": "acquisition",
    "Dendrogram": "cluster",
    "LabeledMatrix": "cluster",
    "agglomerate_complete_link": "cluster",
    "spearman_matrix": "cluster",
    "cut": "cluster",
    "to_distance": "cluster",
    "export_dendrogram": "cluster",
    "dendrogram_from_json": "cluster",
    "Grammar": "grammar",
    "LexicalEntry": "grammar",
    "linearize": "grammar",
    "ContextFrequencyTable": "kwic",
    "KwicRecord": "kwic",
    "build_frequency_table": "kwic",
    "extract_kwic": "kwic",
    "tokenize": "kwic",
    "GeneratorModel": "mother",
    "Utterance": "mother",
    "load_generator": "mother",
    "generate_utterances": "mother",
    "ingest_corpus": "mother",
    "SessionConfig": "session",
    "SessionLog": "session",
    "compare_sessions": "session",
    "load_config_mapping": "session",
    "run_experiment": "session",
    "Crosstab": "stats",
    "TestResult": "stats",
    "crosstab": "stats",
    "fisher_exact_2x2": "stats",
    "fisher_mc": "stats",
    "posthoc_pairwise": "stats",
    "backend_name": "kernels",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module 'modoma' has no attribute {name!r}") from None
    return getattr(import_module(f".{module}", __name__), name)


def __dir__():
    return __all__
