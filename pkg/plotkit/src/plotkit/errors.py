class PlotkitError(Exception):
    """Base class for plotkit failures."""


class HeaderError(PlotkitError):
    """CSV header does not match the expected contract."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class EmptyDataError(PlotkitError):
    """CSV contains a header but no data rows."""
