from .acceptance import *
from .cli import *
from .config import *
from .expansion import *
from .files import *
from .propagation import *
from .qp import *
from .quantum import *
from .synthesis import *
