"""Exception types shared across the toolkit.

Argument misuse raises plain ValueError; I/O problems raise OSError.
ValidationError is reserved for content that parses but violates a
contract (e.g. off-level guidance-map pixels).
"""


class ValidationError(Exception):
    """Input decoded fine but violates a content contract."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details if details is not None else []
