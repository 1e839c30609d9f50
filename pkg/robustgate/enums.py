"""
Enum converters

Each element of an enum is assigned the string literal that represents it in a run configuration.
"""


from .data import *


class Enum(Converter):
    """
    Base class for enum types

    This implementation is used over Python's builtin solutions to permit interface with the `Converter` system.
    """

    _T = str

    _all = []

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        cls._all = [value for attr, value in vars(cls).items() if not attr.startswith("_") and isinstance(value, str)]

    @classmethod
    def get(cls, data: str, **kwargs) -> _T:
        return data

    @classmethod
    def set(cls, value: _T, **kwargs) -> str:
        """
        Converts ``str`` -> ``str``, enforcing that the input is a recognized enum value

        :param value: The value to convert
        :return: ``value``, unchanged
        """

        if value not in cls._all:
            raise ValueError(f"'{value}' is not one of {', '.join(map(repr, cls._all))}")

        return value


class Objective(Enum):
    """
    The objective each iteration's QP optimizes
    """

    ErrorNorm = "errorNorm"
    """
    Minimize the distance between the terminal and target coefficients
    """

    InnerProduct = "innerProduct"
    """
    Maximize the inner product of the terminal and target coefficients
    """


class GateChoice(Enum):
    """
    The gate whose action on the state pairs is synthesized
    """

    CNOT = "cnot"
    SWAP = "swap"

    Custom = "custom"
    """
    Explicit state pairs are given in the configuration
    """


class PairChoice(Enum):
    """
    Which initial states are steered toward their gate images
    """

    Single = "single"
    """
    One basis state whose image is another basis state
    """

    Process = "process"
    """
    All four computational basis states and the uniform superposition
    """


class PulseKind(Enum):
    """
    How the initial pulse is drawn
    """

    Zeros = "zeros"
    UniformRandom = "uniformRandom"


__all__ = ["Enum", "Objective", "GateChoice", "PairChoice", "PulseKind"]
