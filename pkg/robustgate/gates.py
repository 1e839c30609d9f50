"""
Gate definitions
"""


import numpy as np

from .quantum import DIMENSION, DensityMatrix


class Gate:
    """
    Data type for all gate constants

    Every supported two-qubit gate is included in this module as a constant to use in code.
    Each gate holds its name, unitary, and the basis state which it maps nontrivially in single-pair runs.
    """

    GATES = []
    """
    A list of all gates
    """

    def __init__(self, name: str, unitary, witness: str):
        unitary = np.array(unitary, dtype=complex)

        if unitary.shape != (DIMENSION, DIMENSION) or not np.allclose(unitary.conj().T @ unitary, np.eye(DIMENSION)):
            raise ValueError(f"gate '{name}' must be a {DIMENSION}×{DIMENSION} unitary")

        unitary.setflags(write=False)
        self.name = name
        self.unitary = unitary
        self.witness = witness

    def __eq__(self, other):
        return str(self) == str(other)

    def __hash__(self):
        return hash(self.name)

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<Gate {self.name}>"

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        """
        Conjugates a density matrix by this gate

        :param rho: The input state
        :return: ``G ρ G†``
        """

        return DensityMatrix(self.unitary @ np.asarray(rho) @ self.unitary.conj().T)

    @classmethod
    def named(cls, name: str) -> 'Gate':
        """
        Looks up a gate constant by name

        :param name: The gate name, e.g. ``cnot``
        :return: The matching gate
        """

        try:
            return next(gate for gate in cls.GATES if gate.name == name)

        except StopIteration:
            raise ValueError(f"unrecognized gate '{name}'") from None


Gate.GATES = [
    CNOT := Gate("cnot", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], "10"),
    SWAP := Gate("swap", [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], "01")
]


PROCESS_STATES = ("00", "01", "10", "11", "++")
"""
Labels of the initial states used to pin down a gate's full action
"""


def initial_state(label: str) -> DensityMatrix:
    """
    :param label: A computational basis label or ``++``
    :return: The corresponding pure density matrix
    """

    if label == "++":
        return DensityMatrix.from_ket(np.ones(DIMENSION))

    return DensityMatrix.basis(label)


def gate_target(gate: Gate, initial: DensityMatrix) -> tuple[DensityMatrix, DensityMatrix]:
    """
    Pairs an initial state with its image under a gate

    :param gate: The gate
    :param initial: The initial density matrix
    :return: The pair ``(initial, G initial G†)``
    """

    return initial, gate.apply(initial)


def gate_pairs(gate: Gate, mode: str = "single") -> list[tuple[DensityMatrix, DensityMatrix]]:
    """
    Builds the state pairs which characterize a gate

    :param gate: The gate
    :param mode: ``single`` for the gate's witness state alone or ``process`` for every `PROCESS_STATES` entry
    :return: A list of ``(initial, target)`` pairs
    """

    match mode:
        case "single":
            labels = [gate.witness]

        case "process":
            labels = PROCESS_STATES

        case _:
            raise ValueError(f"unrecognized pair mode '{mode}'")

    return [gate_target(gate, initial_state(label)) for label in labels]


__all__ = ["Gate", "CNOT", "SWAP", "PROCESS_STATES", "initial_state", "gate_target", "gate_pairs"]
