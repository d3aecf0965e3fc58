"""Exception hierarchy shared by every module of the package."""


class IdqError(Exception):
    """Base class for all domain errors raised by idq."""


class DiagramError(IdqError, ValueError):
    """The diagram is malformed or a node id is unknown."""


class CycleError(DiagramError):
    """The directed graph contains a cycle."""


class TransformError(IdqError, ValueError):
    """A transformation's precondition does not hold."""


class MissingDataError(IdqError):
    """A sample space or conditional distribution needed for a computation is absent."""

    def __init__(self, node, what="distribution"):
        self.node = node
        self.what = what
        super().__init__(f"node {node}: {what} required but missing")


class QueryError(IdqError, ValueError):
    """The query or function table is inconsistent with the diagram."""


class PlanError(IdqError, ValueError):
    """A plan cannot be parsed or replayed against a diagram."""


class FormatError(IdqError, ValueError):
    """A document on disk could not be parsed into a model."""
