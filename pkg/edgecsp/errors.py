# -*- coding: utf-8 -*-
"""
Exceptions raised by edgecsp.
"""


class EdgeCSPError(Exception):
    """Base class of every error raised by the package."""


class RelationError(EdgeCSPError, ValueError):
    """A relation is malformed or used outside its scope."""


class InstanceError(EdgeCSPError, ValueError):
    """An instance or an edge labeling is malformed."""


class ParseError(EdgeCSPError, ValueError):
    """A JSON document does not match the expected format."""


class OracleBoundError(EdgeCSPError):
    """An exhaustive enumeration would exceed its configured bound."""


class SolverRefusal(EdgeCSPError):
    """The solver refuses an instance it cannot handle correctly."""


class CoverError(EdgeCSPError, ValueError):
    """A cover construction was asked for outside its class."""


class NotImprovingError(EdgeCSPError, ValueError):
    """A labeling that should be strictly better is not."""


class InvariantBreach(EdgeCSPError, AssertionError):
    """An internal invariant failed. Always a bug."""
