from .base import *
from .cocycle import *
from .config import *
from .dimension import *
from .geometry import *
from .pressure import *
from .symbolic import *
