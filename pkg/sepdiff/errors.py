from typing import Optional


class SepDiffError(Exception):
    """Base class for every error the CLI maps to an exit code."""
    exit_code = 1


class InvalidArgumentError(SepDiffError, ValueError):
    exit_code = 2


class ConfigError(SepDiffError):
    exit_code = 2


class EmptyDatasetError(SepDiffError):
    exit_code = 2


class ContractViolationError(SepDiffError):
    exit_code = 1


class UndefinedReferenceError(SepDiffError, ValueError):
    exit_code = 2


class NumericFailureError(SepDiffError, ArithmeticError):
    """Non-finite values showed up; `where` names the step or parameter."""
    exit_code = 4

    def __init__(self, message: str, where: Optional[str] = None):
        super().__init__(message if where is None else f"{message} (at {where})")
        self.where = where


class AudioIOError(SepDiffError, OSError):
    exit_code = 3


class UnsupportedFormatError(AudioIOError):
    pass


class CorruptFileError(AudioIOError):
    pass


class ModelFormatError(SepDiffError):
    exit_code = 3


class VersionMismatchError(ModelFormatError):
    pass


class ConfigMismatchError(ModelFormatError):
    pass
