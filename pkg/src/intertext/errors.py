"""Exception hierarchy shared across the toolkit.

Everything raised on bad data or bad files derives from IntertextError so
the CLI can map it to a data-error exit code in one place.
"""


class IntertextError(Exception):
    """Base class for all toolkit errors."""


class CorpusError(IntertextError):
    """Invalid parallel data: malformed lines, bad language tags, duplicates."""


class StoreFormatError(IntertextError):
    """Malformed or truncated binary store / checkpoint / index file."""


class TrainingError(IntertextError):
    """Invalid training inputs or non-finite optimization state."""


class EvalError(IntertextError):
    """Invalid evaluation inputs."""


class SearchError(IntertextError):
    """Invalid index construction or query."""
