"""Exception hierarchy shared across the package."""


class QotError(Exception):
    """Base class for every error raised by qotlab."""


class StructuralError(QotError, ValueError):
    """Unknown register, out-of-range index, malformed shape or length."""


class CapacityError(QotError):
    """A dense computation was requested beyond the supported width."""


class ContractViolation(QotError):
    """An operation was called outside its documented precondition."""


class NormalizationError(QotError):
    """A state left an operation with norm away from one."""


class CapabilityError(QotError):
    """The requested operation is not available for this hash profile."""


class ProtocolError(QotError):
    """A peer sent something the protocol cannot accept."""


class HandshakeError(ProtocolError):
    """Transport handshake failed (bad magic or version)."""


class FrameTooLarge(ProtocolError):
    """A frame header announced a payload above the frame cap."""
