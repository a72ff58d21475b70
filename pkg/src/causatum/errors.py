"""Diagnostics and exception types shared by every layer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token range; line/column are 1-based, offsets are byte offsets."""

    line: int
    column: int
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError(f"span end {self.end} before start {self.start}")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    variable: Optional[str] = None
    span: Optional[SourceSpan] = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}{self.kind}: {self.message}"


class CausatumError(Exception):
    """Base class; carries one or more diagnostics."""

    def __init__(self, diagnostics: Sequence[Diagnostic] | Diagnostic | str):
        if isinstance(diagnostics, str):
            diagnostics = [Diagnostic(type(self).__name__, diagnostics)]
        elif isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ValidationError(CausatumError):
    """A model, context, intervention or formula failed validation."""


class ParseError(CausatumError):
    """The DSL text could not be parsed into a document."""


class QueryTooLarge(CausatumError):
    pass


class NotAntichain(CausatumError):
    pass
