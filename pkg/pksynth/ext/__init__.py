from ._masks import *
from ._phantom import *
from ._reporter import *
