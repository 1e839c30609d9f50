"""
Robust two-qubit gate synthesis over a Legendre lift of the Lindblad dynamics
"""


from .cli import *
from .config import *
from .diagnostics import *
from .enums import *
from .errors import *
from .expansion import *
from .files import *
from .gates import *
from .propagation import *
from .qp import *
from .quantum import *
from .synthesis import *


__all__ = list({*cli.__all__, *config.__all__, *diagnostics.__all__, *enums.__all__, *errors.__all__,
                *expansion.__all__, *files.__all__, *gates.__all__, *propagation.__all__, *qp.__all__,
                *quantum.__all__, *synthesis.__all__})
