"""Errors raised by symdock.

Every error derives from the builtin exception whose contract it refines so
that callers can catch either the specific class or the generic one.
"""


class InvalidScenario(ValueError):
    """A scenario document or object violates its invariants."""


class EmptyTarget(InvalidScenario):
    """Deflating the target by its margin leaves no area."""


class OutOfDomain(ValueError):
    """A pose lies outside the arena boundary."""


class EmptyActionList(ValueError):
    """Action selection was asked to choose from nothing."""


class RankDeficientLayout(ValueError):
    """A thruster layout cannot produce an arbitrary planar wrench."""


class InvalidStart(ValueError):
    """An episode start pose collides or lies outside the boundary."""


class NoWinningRegion(RuntimeError):
    """The reach-avoid fixed point has no winning cell outside the target."""


class MalformedMessage(ValueError):
    """A wire message could not be decoded.

    Args:
        message: Human readable description.
        position: Character offset into the offending line, if known.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnsupportedVersion(ValueError):
    """The peer asked for a protocol version this build does not speak."""


class ConnectionLost(ConnectionError):
    """The synthesis service could not be reached or hung up."""


class SynthTimeout(TimeoutError):
    """The synthesis service did not answer within the client timeout."""


class EpochMiss(SynthTimeout):
    """No synthesis result arrived before the epoch deadline."""
