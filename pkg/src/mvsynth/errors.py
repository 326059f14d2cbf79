"""Exception types shared across the package."""

from __future__ import annotations


class MvSynthError(Exception):
    """Base class for package errors."""


class DomainError(MvSynthError):
    """Bad input domain: arity mismatch, point outside the unit cube, or a
    value that is not an exact rational/integer where one is required."""


class TermSyntaxError(MvSynthError):
    """Malformed term text; carries the character offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class DescriptionError(MvSynthError):
    """Malformed function-description document (schema violation)."""


class InvalidDescriptionError(MvSynthError):
    """Description parses but does not denote a valid input function:
    range outside [0, 1], or a region on which no constituent matches."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotMemberError(MvSynthError):
    """Ideal membership refuted: the element is positive at a point where
    the generator vanishes, so no multiplier can ever dominate it."""

    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


class NotCongruentError(MvSynthError):
    """Gluing precondition failed: the two sides differ at a point where
    the joined ideal's generator vanishes."""

    def __init__(self, message: str, witness, index=None):
        super().__init__(message)
        self.witness = witness
        self.index = index


class CapExceededError(MvSynthError):
    """Membership search passed its iteration cap without resolving."""

    def __init__(self, cap: int):
        super().__init__(f"membership search exceeded cap {cap}")
        self.cap = cap


class CertificationError(MvSynthError):
    """Internal consistency failure: a constructed term failed its final
    equality certificate.  Always a bug, never expected user error."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeLimitError(MvSynthError):
    """A lattice normal form grew past the configured safety limit."""
