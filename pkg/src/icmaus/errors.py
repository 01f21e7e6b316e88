"""Exception types raised across the package."""


class ICMAUSError(Exception):
    """Base class for all errors raised by this package."""


class KBParseError(ICMAUSError, ValueError):
    """A knowledge-base line could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class KBValidationError(ICMAUSError, ValueError):
    """A knowledge base parsed but violates an invariant."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicatePatternError(KBValidationError):
    pass


class UnknownSymbolError(ICMAUSError, KeyError):
    def __str__(self):
        return f"unknown symbol {self.args[0]!r}"


class IndiscriminablePatternError(ICMAUSError, ValueError):
    pass


class LegalityError(ICMAUSError, ValueError):
    """The alignment cannot be projected onto a single sequence."""


class ContractError(ICMAUSError, ValueError):
    """A caller broke an operation's precondition."""


class DecodeError(ICMAUSError, ValueError):
    pass


class EmptyReferenceSetError(ICMAUSError, ValueError):
    pass


class ScenarioError(ICMAUSError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ":".join(str(p) for p in (path, line) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)


class RenderError(ICMAUSError, ValueError):
    pass
