import torch as _torch

__all__ = ['PksException',
           'ValidationError',
           'NumericalDivergenceError',
           'MaskGenerationError',
           'ConfigError',
           'RawFormatError',
           'TruncatedPayloadError',
           'HeaderPayloadMismatchError',
           'HeaderParseError',
           'PksWarning',
           'RankClampWarning',
           'require',
           'require_finite']


class PksException(Exception):
    pass


class ValidationError(PksException, ValueError):
    pass


class NumericalDivergenceError(PksException):
    def __init__(self, iteration: int, message: str = ""):
        self.iteration = iteration
        super().__init__(message or f"non-finite iterate at iteration "
                                    f"{iteration}")


class MaskGenerationError(PksException):
    pass


class ConfigError(PksException):
    pass


class RawFormatError(PksException):
    """Base class of raw k-space file errors.

    Every class carries a distinct integer `code`, used as the command-line
    exit status. Codes 1 and 2 are taken by click (generic failure and usage
    error), so raw-file codes start at 3.
    """
    code: int = 6


class TruncatedPayloadError(RawFormatError):
    code = 3


class HeaderPayloadMismatchError(RawFormatError):
    code = 4


class HeaderParseError(RawFormatError):
    code = 5


class PksWarning(UserWarning):
    pass


class RankClampWarning(PksWarning):
    pass


def require(condition: bool, message: str):
    if not condition:
        raise ValidationError(message)


def require_finite(tensor: _torch.Tensor, what: str = "input"):
    if not bool(_torch.isfinite(tensor).all()):
        raise ValidationError(f"{what} contains non-finite samples")
