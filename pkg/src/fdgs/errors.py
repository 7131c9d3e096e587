"""Exception hierarchy shared by every layer of the scheme."""


class FdgsError(Exception):
    """Base class for all library errors."""


class InvalidResidue(FdgsError):
    pass


class OutOfRange(FdgsError):
    pass


class DimensionMismatch(FdgsError):
    pass


class BadProfile(FdgsError):
    pass


class DecodeError(FdgsError):
    """Malformed or truncated canonical encoding."""


class WitnessRejected(FdgsError):
    """Prover was handed a witness outside VALID or with M.z != u."""


class ExtractionFailed(FdgsError):
    pass


class InstanceUnsatisfiable(FdgsError):
    pass


class CannotExtend(FdgsError):
    """Inequality gadget refused a zero vector."""


class InvalidWitness(FdgsError):
    pass


class GroupFull(FdgsError):
    pass


class InvalidKey(FdgsError):
    pass


class UnknownMember(FdgsError):
    pass


class StaleWitness(FdgsError):
    pass


class ResampleLimit(FdgsError):
    """Key generation kept producing a zero public key."""
