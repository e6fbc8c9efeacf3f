"""Exception hierarchy; the CLI maps ConfigError to exit 2 and DataError to 3."""


class ModomaError(Exception):
    pass


class ConfigError(ModomaError):
    """Bad user-supplied configuration (files, parameters, flags)."""


class GrammarSpecError(ConfigError):
    """Generator grammar-spec file failed to parse or validate."""


class DataError(ModomaError):
    """Input data cannot support the requested computation."""


class InsufficientDataError(DataError):
    """Too little data retained for the pipeline stage (corpus, rows, leaves)."""


class GenerationError(DataError):
    """No utterance could be derived within the configured bounds."""


class GrammarError(ModomaError):
    """Violation of the daughter grammar's store invariants."""


class PropertyConflictError(GrammarError):
    """A feature already holds a different value on this entry."""


class LinearizationError(GrammarError):
    """Structure cannot be linearized (missing directionality or phonform)."""
