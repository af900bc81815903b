"""Exception hierarchy shared by every relent module.

Semantic failures (bad probabilities, non-commuting squares, mismatched
spaces) derive from :class:`ValidationError`; problems reading a document
derive from :class:`DocumentError`. The CLI maps the two families to exit
codes 1 and 2.
"""

from __future__ import annotations


class RelentError(Exception):
    """Base class for all relent errors."""


class ValidationError(RelentError, ValueError):
    """An object fails the invariants of its type."""


class InvalidDistribution(ValidationError):
    pass


class InvalidChannel(ValidationError):
    pass


class SpaceMismatch(ValidationError):
    def __init__(self, what: str, expected, got):
        self.what = what
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected space {expected!r}, got {got!r}")


class LabelError(ValidationError):
    pass


class NotPure(ValidationError):
    pass


class NotASection(ValidationError):
    def __init__(self, violation: float):
        self.violation = violation
        super().__init__(f"channel is not a stochastic section: off-fiber mass {violation:.3g}")


class NotSurjective(ValidationError):
    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"function is not surjective; empty fibers over {list(self.missing)!r}")


class PriorMismatch(ValidationError):
    def __init__(self, violation: float):
        self.violation = violation
        super().__init__(f"priors do not agree: max entrywise difference {violation:.3g}")


class SquareDoesNotCommute(ValidationError):
    def __init__(self, condition: str, violation: float):
        self.condition = condition
        self.violation = violation
        super().__init__(f"2-morphism condition {condition!r} fails: max entrywise violation {violation:.3g}")


class GlueMismatch(ValidationError):
    def __init__(self, what: str, violation: float):
        self.what = what
        self.violation = violation
        super().__init__(f"cannot glue along {what}: max entrywise difference {violation:.3g}")


class EmptyFamily(ValidationError):
    pass


class SizeError(RelentError, ValueError):
    pass


class DocumentError(RelentError):
    """A document cannot be read into named objects."""


class ParseError(DocumentError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DanglingReference(DocumentError):
    def __init__(self, section: str, name: str, owner: str):
        self.section = section
        self.name = name
        self.owner = owner
        super().__init__(f"{owner} references undefined {section} entry {name!r}")


class DuplicateName(DocumentError):
    def __init__(self, section: str, name: str):
        self.section = section
        self.name = name
        super().__init__(f"duplicate name {name!r} in section {section!r}")


class UnknownSuite(RelentError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"unknown suite {self.name!r}"


class ArchiveError(RelentError, OSError):
    pass
