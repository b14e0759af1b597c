"""Exception hierarchy. Everything raised for bad data derives from GenMMError."""


class GenMMError(ValueError):
    """Base class for data/parameter errors (CLI exit code 3)."""


class InvalidInputError(GenMMError):
    pass


class InvalidParameterError(GenMMError):
    pass


class DegenerateRotationError(GenMMError):
    def __init__(self, msg, frame=None, joint=None):
        loc = []
        if frame is not None:
            loc.append(f"frame {frame}")
        if joint is not None:
            loc.append(f"joint {joint}")
        if loc:
            msg = f"{msg} (at {', '.join(loc)})"
        super().__init__(msg)
        self.frame = frame
        self.joint = joint


class BvhSyntaxError(GenMMError):
    def __init__(self, msg, line=None, column=None):
        if line is not None:
            msg = f"line {line}, column {column}: {msg}"
        super().__init__(msg)
        self.line = line
        self.column = column


class ChannelCountMismatchError(BvhSyntaxError):
    pass


class UnsupportedChannelLayoutError(GenMMError):
    pass


class ExemplarTooShortError(GenMMError):
    pass


class OutputTooShortError(GenMMError):
    pass


class TooShortError(GenMMError):
    pass


class PartitionError(GenMMError):
    pass


class UnknownJointError(PartitionError):
    pass


class NonSubtreeError(PartitionError):
    pass


class UncoveredJointError(PartitionError):
    pass


class MissingOverlapError(PartitionError):
    pass


class LayoutMismatchError(GenMMError):
    pass
