from .error_reporter import *
from .history_reporter import *
from .hdf5_reporter import *
from .write_image import *
