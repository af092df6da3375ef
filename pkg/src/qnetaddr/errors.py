"""Exception taxonomy shared by all simulator modules."""


class QnetError(Exception):
    """Base class for every error raised by this package."""


# --- state-vector layer ---------------------------------------------------


class InvalidLabel(QnetError):
    """A basis label is out of range or has the wrong arity for its layout."""


class ZeroState(QnetError):
    """An operation would produce the zero vector (nothing to normalize)."""


class UnknownSite(QnetError):
    """A referenced register site is not part of the layout."""


class NotUnitary(QnetError):
    """A matrix supplied as a local unitary fails the unitarity check."""


class InvalidPermutation(QnetError):
    """A basis-permutation gate is not a bijection on its label space."""


class SiteClash(QnetError):
    """Two register collections overlap where they must be disjoint."""


class DimMismatch(QnetError):
    """Register dimensions are incompatible with the requested operation."""


class LayoutMismatch(QnetError):
    """Two states do not share the same register layout."""


# --- topology layer -------------------------------------------------------


class TopologyError(QnetError):
    """Base class for topology-file diagnostics; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TopologyFormatError(TopologyError):
    """Malformed line in a topology file."""


class UnknownDevice(TopologyError):
    """A device id is referenced but was never declared."""


class DuplicateEdge(TopologyError):
    """The same Bell-pair edge is declared twice (or as a self-loop)."""


class DisconnectedTopology(TopologyError):
    """The Bell-pair graph does not connect all devices."""


# --- addressing layer -----------------------------------------------------


class BadAssignment(QnetError):
    """An address assignment violates the address-book invariants."""


class DuplicateTarget(QnetError):
    """A request lists the same target address twice."""


class UnknownOp(QnetError):
    """An operation code is outside the gate catalog."""


# --- routing layer --------------------------------------------------------


class ResourceConsumed(QnetError):
    """A Bell pair was already used for teleportation."""


class RoutingInconsistency(QnetError):
    """No routing branch leads to the requested target (internal error)."""


class RangeError(QnetError):
    """A numeric argument is outside the supported range."""


# --- scenarios layer ------------------------------------------------------


class UnknownFixture(QnetError):
    """No built-in fixture with the requested name."""


class BadFixture(QnetError):
    """A fixture violates its own consistency requirements."""
