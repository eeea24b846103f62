"""Exception types shared across the toolkit."""

from __future__ import annotations


class CanaryLiftError(Exception):
    """Base class for all toolkit errors."""


class LexError(CanaryLiftError):
    """Raised by the tokenizer; carries the byte offset of the offending input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ParseError(CanaryLiftError):
    """Raised by the parser; carries the span of the offending token."""

    def __init__(self, message: str, span=None, expected: str | None = None):
        detail = message
        if expected is not None:
            detail = f"{message}; expected {expected}"
        if span is not None:
            detail = f"{detail} (at bytes {span.start}..{span.end})"
        super().__init__(detail)
        self.span = span
        self.expected = expected


class RangeError(CanaryLiftError):
    """A requested span falls outside the source text."""


class OffsetNotFound(CanaryLiftError):
    """Neither base-offset strategy produced a value."""


class OffsetConflict(CanaryLiftError):
    """The two base-offset strategies produced irreconcilable values."""


class UnrecognizedIife(CanaryLiftError):
    """An IIFE does not match any known canary or shuffle pattern."""


class IndexOutOfRange(CanaryLiftError):
    """A decoder index falls outside [base, base + table length)."""


class OverlapError(CanaryLiftError):
    """Rewrite edits overlap or are out of order."""


class AssemblyError(CanaryLiftError):
    """A harness cannot be assembled into a self-contained program."""


class ForgeError(CanaryLiftError):
    """Sample generation could not satisfy its constraints."""


class CorruptionError(CanaryLiftError):
    """Tampering could not produce an unsatisfiable sample."""
