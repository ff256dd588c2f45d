__version__ = "0.1.0"

from .contexts import *
from .errors import *
from .flows import *
from .matrix import *
from .measures import *
from .spectral import *
from .subobjects import *
