from .phantom import *
from .coil_maps import *
from .raw_io import *
