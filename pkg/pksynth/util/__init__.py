'''
Utility functions.
'''

from .utility import *
from .metrics import *

__all__ = [
    'PksException',
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
    'require_finite',
    'MetricPair',
    'PSNR_CAP_DB',
    'psnr',
    'ssim',
    'evaluate',
    'gaussian_window',
]
