"""Exception types shared across the package."""


class HyperpipeError(Exception):
    """Base class for all package-specific errors."""


class NotFittedError(HyperpipeError):
    """Raised when transform/predict is called before fit."""


class CallbackError(HyperpipeError):
    """Raised when a pipeline callback delegate fails; carries the node name."""

    def __init__(self, node_name, cause):
        super().__init__(f"callback '{node_name}' raised: {cause}")
        self.node_name = node_name
        self.cause = cause


class ArchiveError(HyperpipeError):
    """Raised for malformed, truncated or incompatible model archives."""


class SpecFileError(HyperpipeError):
    """Raised when an analysis spec file fails validation.

    ``errors`` holds one "field: message" line per problem.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid analysis spec:\n" + "\n".join(self.errors))


class RunError(HyperpipeError):
    """Raised when an analysis cannot produce a result (e.g. no configuration
    of a fold completed).  ``records`` carries the per-config evaluation
    records gathered before the failure, for diagnosis."""

    def __init__(self, message, records=None):
        super().__init__(message)
        self.records = records or []
