"""Exception hierarchy shared by every layer of the package."""


class GrcError(Exception):
    """Base class for all errors raised by :mod:`grc`."""


class KeyOutsideSpace(GrcError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class MassExceedsOne(GrcError, ValueError):
    pass


class NegativeEntry(GrcError, ValueError):
    pass


class DuplicateLabel(GrcError, ValueError):
    pass


class ShapeMismatch(GrcError, ValueError):
    pass


class NotColumnSubstochastic(GrcError, ValueError):
    pass


class NotSubpermutation(GrcError, ValueError):
    pass


class NotAPartition(GrcError, ValueError):
    pass


class NotPartitioned(GrcError, ValueError):
    pass


class NotDeterministic(GrcError, ValueError):
    pass


class NotClosedTransformation(GrcError, ValueError):
    pass


class NotADistribution(GrcError, ValueError):
    pass


class UnknownGate(GrcError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class InvalidMultiplicity(GrcError, ValueError):
    pass


class ParseError(GrcError, ValueError):
    """Malformed circuit document. ``position`` is a JSON path or ``line:col``."""

    def __init__(self, message: str, position: str = ""):
        self.message = message
        self.position = position
        super().__init__(f"{position}: {message}" if position else message)
