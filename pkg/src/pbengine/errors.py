"""Shared error type carrying a machine-readable code."""

from __future__ import annotations


class VoteError(Exception):
    """Raised by module operations; `code` is a stable kebab-case string."""

    def __init__(self, code: str, message: str, field: str | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.field = field

    def to_dict(self) -> dict:
        body = {"code": self.code, "message": self.message}
        if self.field is not None:
            body["field"] = self.field
        return body
