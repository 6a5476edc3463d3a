"""Source spans and diagnostics shared by the parser and the rule engine."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    """A half-open region of a source document, 1-based lines and columns."""

    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if self.start_line < 1 or self.start_col < 1:
            raise ValueError("source positions are 1-based")
        if (self.end_line, self.end_col) < (self.start_line, self.start_col):
            raise ValueError("span must not end before it starts")

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass(frozen=True)
class Diagnostic:
    """A single finding with a stable rule id.

    `subject_id` names the element the finding is about (a hazard id, a
    claim-node key, a row key, ...); `span` is present whenever the finding
    can be pinned to source text.
    """

    rule_id: str
    severity: Severity
    message: str
    subject_id: str = ""
    span: SourceSpan | None = None

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")

    def sort_key(self) -> tuple:
        # File, then position, then errors ahead of warnings, then rule id.
        # Diagnostics without a span sort behind positioned ones in the
        # same file group (empty file name first).
        if self.span is None:
            file_name, line, col = "", 1 << 30, 1 << 30
        else:
            file_name, line, col = self.span.file, self.span.start_line, self.span.start_col
        severity_rank = 0 if self.severity is Severity.ERROR else 1
        return (file_name, line, col, severity_rank, self.rule_id, self.subject_id)


def sort_diagnostics(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diagnostics, key=Diagnostic.sort_key)
