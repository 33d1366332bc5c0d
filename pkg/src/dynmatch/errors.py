"""Exception types shared across the package."""


class DynMatchError(Exception):
    """Base class for every error raised by this package."""


class GraphError(DynMatchError, ValueError):
    """An update violated the simple-graph preconditions."""


class DuplicateEdge(GraphError):
    pass


class MissingEdge(GraphError):
    pass


class InvalidVertex(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class InvariantViolation(DynMatchError, AssertionError):
    """Internal consistency check failed. Always indicates a bug."""


class LevelRangeError(DynMatchError, ValueError):
    """The vertex universe is too small to host the requested level range."""


class EpsilonTooSmall(DynMatchError, ValueError):
    pass


class InfeasibleFractional(DynMatchError, ValueError):
    """Some vertex carries total fractional weight above one."""


class InfeasibleWitness(DynMatchError, AssertionError):
    pass


class TooLarge(DynMatchError, ValueError):
    """Input exceeds the limits of an exhaustive oracle."""


class NonPositiveWeight(DynMatchError, ValueError):
    pass


class StreamError(DynMatchError, ValueError):
    """Base for stream-file problems; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(StreamError):
    pass


class PreconditionError(StreamError):
    pass


class UnknownKind(DynMatchError, ValueError):
    pass
