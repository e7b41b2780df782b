"""Exception hierarchy shared by every module."""

from __future__ import annotations


class NlgBidiError(ValueError):
    """Base class for all toolkit errors."""


class EmptyTerm(NlgBidiError):
    def __init__(self, raw: str):
        super().__init__(f"term is empty after canonicalization: {raw!r}")
        self.raw = raw


class EmptyTripleSet(NlgBidiError):
    pass


class MalformedTriple(NlgBidiError):
    def __init__(self, segment: str, index: int, line: int | None = None):
        where = f"line {line}, " if line is not None else ""
        super().__init__(f"{where}segment {index} is not a 3-term triple: {segment!r}")
        self.segment = segment
        self.index = index
        self.line = line


class EmptyOutput(NlgBidiError):
    pass


class ReferenceIndexOutOfRange(NlgBidiError, IndexError):
    pass


class UnboundVariable(NlgBidiError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable ${name}")
        self.name = name


class DuplicateBinding(NlgBidiError):
    def __init__(self, name: str):
        super().__init__(f"variable {name} bound more than once")
        self.name = name


class EmptyGold(NlgBidiError):
    pass


class BothEmpty(NlgBidiError):
    pass


class EmptyInput(NlgBidiError):
    pass


class MixedReportKinds(NlgBidiError):
    pass


class EmptyBase(NlgBidiError):
    pass


class EmptyCorpus(NlgBidiError):
    pass


class IoFailure(NlgBidiError, OSError):
    pass


class SchemaViolation(NlgBidiError):
    def __init__(self, line: int, field: str, message: str = ""):
        super().__init__(f"line {line}: field {field!r} {message}".rstrip())
        self.line = line
        self.field = field


class SplitCountMismatch(NlgBidiError):
    def __init__(self, expected: dict, actual: dict):
        super().__init__(f"split counts {actual} do not match expected {expected}")
        self.expected = expected
        self.actual = actual
