from ._mask_generator import *

from .random2d import *
from .cartesian1d import *
from .poisson2d import *

from ._mask_by_name import *
