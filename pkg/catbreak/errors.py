"""Exception types shared across catbreak."""

from __future__ import annotations


class CatbreakError(ValueError):
    """Raised when an operation's precondition fails.

    ``code`` names the failure (for example ``INVALID_EDIT`` or ``TOO_LARGE``)
    so callers and the CLI can react without parsing messages.
    """

    def __init__(self, code: str, message: str, payload: dict | None = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.payload = payload or {}
