class ExportError(Exception):
    """Bad input data, malformed sentence files, or unusable model output."""
