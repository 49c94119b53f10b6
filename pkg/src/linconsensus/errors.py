"""Exception hierarchy shared by every module of the package."""


class ConsensusError(Exception):
    """Base class for all errors raised by linconsensus."""


class InvalidSizeError(ConsensusError, ValueError):
    pass


class InvalidParameterError(ConsensusError, ValueError):
    pass


class TopologyError(ConsensusError):
    """Raised when a protocol is asked to run on a disconnected graph."""


class InvalidMatrixError(ConsensusError, ValueError):
    pass


class ShapeError(ConsensusError, ValueError):
    pass


class UnsupportedMetricError(ConsensusError):
    pass


class IncompleteSpecError(ConsensusError):
    """A formation spec is missing the offset for some graph edge."""


class MalformedSpecError(ConsensusError):
    """A formation spec violates r_ij = -r_ji."""


class FormationInvalidError(ConsensusError):
    """The offsets are not realisable by any set of points."""


class InvalidConfigError(ConsensusError, ValueError):
    pass
