"""Exception hierarchy for the evaluation engine.

InputError subclasses signal rejected inputs (CLI exit code 2).
JudgementConflict signals contradictory verdicts (CLI exit code 1).
NothingToDo signals empty work, e.g. sampling from a zero-diff run
(CLI exit code 3).
"""


class IdEvalError(Exception):
    """Base class for all errors raised by this package."""


class InputError(IdEvalError):
    """An input file, config, or in-memory structure failed validation."""


class InvalidClustering(InputError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MissingWeight(InputError):
    pass


class ItemUniverseMismatch(InputError):
    pass


class UniverseMismatch(InputError):
    pass


class EmptyIntersection(InputError):
    pass


class DuplicateEpochLabel(InputError):
    pass


class MissingIdealClass(InputError):
    pass


class UnknownElement(InputError):
    pass


class ParseError(InputError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class ConfigError(InputError):
    pass


class UnknownPair(InputError):
    pass


class NotABijection(InputError):
    pass


class JudgementConflict(IdEvalError):
    """Verdicts imply both equivalence and distinctness for some pair."""

    def __init__(self, message, triangles=None):
        super().__init__(message)
        self.triangles = triangles or []


class NothingToDo(IdEvalError):
    pass


class NothingToSample(NothingToDo):
    pass


class InsufficientCoverage(NothingToDo):
    pass
