"""Exception hierarchy shared across the package."""


class ViewCleanError(Exception):
    """Base class for all viewclean errors."""


class ConfigError(ViewCleanError):
    """Invalid configuration: bad schema, unknown column, malformed view spec."""


class DataError(ViewCleanError):
    """Missing or malformed input data (files, ids, labels)."""


class EvaluationError(ViewCleanError):
    """A view could not be evaluated against a relation."""


class LabelingAborted(ViewCleanError):
    """Raised when a labeler fails mid-session.

    Carries the session state at the point of failure so the caller can
    resume: the pending batch is still outstanding and no budget was spent
    on it.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
