"""Exception hierarchy shared by every module."""


class CmaError(Exception):
    """Base class for all errors raised by cmaplan."""


class SpaceMismatchError(CmaError, ValueError):
    """Two objects built over different state spaces were combined."""


class CompileError(CmaError, ValueError):
    """A symbolic condition, effect or utility could not be compiled."""


class InvalidModelError(CmaError, ValueError):
    """An operation received a model that fails validation.

    The offending :class:`~cmaplan.validation.Report` is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class WitnessError(CmaError, ValueError):
    """A number assignment does not cover the tree it is checked against."""


class ParseError(CmaError):
    """A domain file is malformed or contains dangling references."""


class MappingError(CmaError):
    """An execution trace could not be folded onto a projected tree.

    This always indicates a bug in projection or in the oracle itself.
    """
