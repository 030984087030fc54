"""Exception hierarchy shared by every module.

Each class maps onto one CLI exit code through ``ClbtError.exit_code``.
"""


class ClbtError(Exception):
    exit_code = 2


class UsageError(ClbtError):
    exit_code = 1


class NumericalError(ClbtError):
    exit_code = 3


# linalg
class InvalidMatrix(ClbtError, ValueError):
    pass


class InvalidDimension(ClbtError, ValueError):
    pass


class NumericalFailure(NumericalError):
    pass


class SingularMatrix(NumericalError):
    pass


# alignment extraction
class InvalidInput(ClbtError, ValueError):
    pass


class MalformedBitextLine(ClbtError, ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"bitext line {line_no}: {message}")
        self.line_no = line_no


class MalformedAlignmentLine(ClbtError, ValueError):
    def __init__(self, line_no, message):
        super().__init__(f"alignment line {line_no}: {message}")
        self.line_no = line_no


class LinkOutOfRange(ClbtError, ValueError):
    pass


class CorpusMismatch(ClbtError, ValueError):
    pass


# embeddings and files
class FormatError(ClbtError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)
        self.position = position


class MissingEmbedding(ClbtError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyTrainingSet(ClbtError, ValueError):
    pass


class DimensionError(ClbtError, ValueError):
    pass


class InvalidSpec(ClbtError, ValueError):
    """Invalid user-supplied parameters (fit config, synth spec, ablation counts)."""

    exit_code = 1
