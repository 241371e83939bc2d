"""Top-level package for pksynth."""

__author__ = 'pksynth developers'
__version__ = '0.1.0'

from ._context import *
from ._kspace import *
from ._hankel import *

from ._solver import *
from ._partition import *

import pksynth.util
import pksynth.ext

from pksynth.util import *
from pksynth.ext import *

from ._harness import *
