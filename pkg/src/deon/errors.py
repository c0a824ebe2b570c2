"""Exception types shared across the toolkit."""


class DeonError(Exception):
    """Base class for every error raised by ``deon``."""


class DuplicateSymbol(DeonError, ValueError):
    pass


class EmptyAlphabet(DeonError, ValueError):
    pass


class UnknownSymbol(DeonError, ValueError):
    pass


class AlternationViolation(DeonError, ValueError):
    pass


class AlphabetMismatch(DeonError, ValueError):
    pass


class SpecSyntaxError(DeonError, ValueError):
    """Malformed spec text; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


class UndeclaredSymbol(SpecSyntaxError):
    pass


class DuplicateSection(SpecSyntaxError):
    pass


class StateBlowup(DeonError, RuntimeError):
    pass


class FormatError(DeonError, ValueError):
    pass


class PartialPolicy(DeonError, ValueError):
    pass


class NotStronglyViable(DeonError, ValueError):
    pass


class TrivialDeontology(DeonError, ValueError):
    pass


class EmptyHistoryNotGood(DeonError, ValueError):
    pass


class NotGovernable(DeonError, ValueError):
    pass


class ProtocolOrder(DeonError, RuntimeError):
    pass


class MappingIncomplete(DeonError, KeyError):
    pass
