"""Exception types shared across the package."""


class CausalBdeError(Exception):
    """Base class for all errors raised by this package."""


class CycleDetected(CausalBdeError):
    """A directed graph that must be acyclic contains a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle))


class UnknownNode(CausalBdeError):
    """An arc or assignment references a node that was never declared."""


class ArityMismatch(CausalBdeError):
    """A state index or assignment does not fit the declared arities."""


class StateSpaceTooLarge(CausalBdeError):
    """Dense joint enumeration would exceed the configured cap."""


class VariableMismatch(CausalBdeError):
    """Two objects that must share a variable set (or index layout) do not."""


class MissingValue(CausalBdeError):
    """A complete-data operation met a missing observation.

    Missing and hidden values are handled by the exact-marginalization
    path, not by the plain sufficient-statistics path.
    """


class TooManyCompletions(CausalBdeError):
    """Exact missing-data marginalization would exceed the completion cap."""


class CapExceeded(CausalBdeError):
    """A combinatorial enumeration exceeds its configured bound."""


class DataError(CausalBdeError):
    """User-supplied data violates a documented precondition."""


class FormatError(CausalBdeError):
    """An input file could not be parsed; names the file and location."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(where + message)
