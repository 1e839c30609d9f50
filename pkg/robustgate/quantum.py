"""
Two-qubit Lindblad model and its real vectorized form

The density matrix is column-stacked into ``R`` and split into ``[Re(R), Im(R)]``.
Under column stacking, ``vec(A X B) = (B' ⊗ A) vec(X)`` governs every lifted matrix.
"""


import numpy as np

from collections.abc import Sequence
from scipy.linalg import expm


DIMENSION = 4
"""
Hilbert space dimension of the two-qubit system
"""

STATE_SIZE = 2 * DIMENSION ** 2
"""
Length of a vectorized state
"""

POPULATION_INDICES = tuple(j * (DIMENSION + 1) for j in range(DIMENSION))
"""
Indices of the diagonal (population) entries inside a vectorized state
"""

CHANNELS = ("u1x", "u1y", "u2x", "u2y")
"""
Control channel names, in the order used by every pulse array
"""


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex)
}

_BASIS = {"00": 0, "01": 1, "10": 2, "11": 3}


def pauli(axis: str) -> np.ndarray:
    """
    Fetches a Pauli matrix

    :param axis: One of ``x``, ``y``, or ``z``
    :return: A fresh 2×2 complex Pauli matrix
    """

    try:
        return _PAULI[axis].copy()

    except (KeyError, TypeError):
        raise ValueError(f"unrecognized Pauli axis '{axis}'") from None


def qubit_operator(axis: str, qubit: int) -> np.ndarray:
    """
    Embeds a Pauli matrix acting on one qubit into the two-qubit space

    :param axis: One of ``x``, ``y``, or ``z``
    :param qubit: Which qubit to act on, ``1`` or ``2``
    :return: ``σ ⊗ I`` for the first qubit or ``I ⊗ σ`` for the second
    """

    match qubit:
        case 1: return np.kron(pauli(axis), np.eye(2))
        case 2: return np.kron(np.eye(2), pauli(axis))
        case _: raise ValueError(f"qubit must be 1 or 2, got {qubit}")


_CONTROL_OPERATORS = tuple(qubit_operator(name[2], int(name[1])) for name in CHANNELS)


class DensityMatrix:
    """
    A 4×4 density matrix of the two-qubit system

    Physical states are Hermitian, have unit trace, and are positive semidefinite.
    Construction does not enforce physicality; use `validate` for that.
    """

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)

        if entries.shape != (DIMENSION, DIMENSION):
            raise ValueError(f"density matrix must be {DIMENSION}×{DIMENSION}, got shape {entries.shape}")

        entries.setflags(write=False)
        self.entries = entries

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.entries.astype(dtype) if dtype is not None else self.entries

    def __eq__(self, other) -> bool:
        try:
            return np.array_equal(self.entries, other.entries)

        except AttributeError:
            return False

    def __repr__(self) -> str:
        return f"DensityMatrix({self.entries.tolist()!r})"

    @classmethod
    def basis(cls, label: str) -> 'DensityMatrix':
        """
        Creates the projector onto a computational basis state

        :param label: A two-character label such as ``10``
        :return: ``|label><label|``
        """

        try:
            index = _BASIS[label]

        except KeyError:
            raise ValueError(f"unrecognized basis label '{label}'") from None

        entries = np.zeros((DIMENSION, DIMENSION), dtype=complex)
        entries[index, index] = 1
        return cls(entries)

    @classmethod
    def from_ket(cls, ket: Sequence[complex]) -> 'DensityMatrix':
        """
        Creates a pure state from a (not necessarily normalized) ket

        :param ket: The four ket amplitudes
        :return: ``|ket><ket|`` normalized to unit trace
        """

        ket = np.asarray(ket, dtype=complex)
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()))

    @property
    def populations(self) -> np.ndarray:
        """
        :return: The diagonal probabilities of ``|00>``, ``|01>``, ``|10>``, and ``|11>``
        """

        return self.entries.diagonal().real.copy()

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def purity(self) -> float:
        """
        :return: ``tr(ρ²)``
        """

        return float(np.trace(self.entries @ self.entries).real)

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def min_eigenvalue(self) -> float:
        hermitian = (self.entries + self.entries.conj().T) / 2
        return float(np.linalg.eigvalsh(hermitian)[0])

    def validate(self, *, hermitian_tol: float = 1e-12, trace_tol: float = 1e-12, eigen_tol: float = 1e-9):
        """
        Checks that this density matrix is physical

        :param hermitian_tol: Allowed deviation from Hermiticity
        :param trace_tol: Allowed deviation of the trace from one
        :param eigen_tol: Allowed negativity of the smallest eigenvalue
        """

        if self.hermiticity_error > hermitian_tol:
            raise ValueError(f"density matrix is not Hermitian (deviation {self.hermiticity_error:.3g})")

        if abs(self.trace - 1) > trace_tol:
            raise ValueError(f"density matrix does not have unit trace (trace {self.trace:.12g})")

        if self.min_eigenvalue < -eigen_tol:
            raise ValueError(f"density matrix is not positive semidefinite (min eigenvalue {self.min_eigenvalue:.3g})")


class SystemMatrices:
    """
    Real drift and control matrices of the vectorized two-qubit Lindblad equation

    The drift has the block form ``[[A_L, -A_z], [A_z, A_L]]`` where ``A_L`` and ``A_z`` are the real and imaginary
    parts of the complex Liouvillian of the coupling and dissipator terms.
    Control matrices for ``x`` drives are block-antidiagonal and those for ``y`` drives are block-diagonal.
    """

    def __init__(self, drift: np.ndarray, controls: Sequence[np.ndarray], coupling_j: float, decoherence_gamma: float):
        self.drift = _frozen(drift)
        self.controls = tuple(_frozen(control) for control in controls)
        self.coupling_j = float(coupling_j)
        self.decoherence_gamma = float(decoherence_gamma)

        if len(self.controls) != len(CHANNELS):
            raise ValueError(f"expected {len(CHANNELS)} control matrices, got {len(self.controls)}")

    @property
    def size(self) -> int:
        return self.drift.shape[0]

    def generator(self, u_k: Sequence[float], alpha: float = 1.0, beta: float = 1.0) -> np.ndarray:
        """
        Assembles ``α A + β Σ u B`` for one set of control amplitudes

        :param u_k: The four control amplitudes
        :param alpha: Scaling of the drift
        :param beta: Scaling of the controls
        :return: The 32×32 real generator
        """

        matrix = alpha * self.drift
        for amplitude, control in zip(u_k, self.controls):
            matrix = matrix + (beta * amplitude) * control

        return matrix


def _frozen(matrix) -> np.ndarray:
    matrix = np.array(matrix, dtype=float)
    matrix.setflags(write=False)
    return matrix


def hamiltonian(J: float, u: Sequence[float]) -> np.ndarray:
    """
    Builds the rotating-frame Hamiltonian of two Ising-coupled qubits

    :param J: The coupling strength
    :param u: The amplitudes ``(u1x, u1y, u2x, u2y)``
    :return: ``(J/4) σ1z σ2z + (1/2) Σ u σ``
    """

    u = np.asarray(u, dtype=float)
    if u.shape != (len(CHANNELS),):
        raise ValueError(f"expected {len(CHANNELS)} control amplitudes, got shape {u.shape}")

    matrix = J / 4 * qubit_operator("z", 1) @ qubit_operator("z", 2)
    for amplitude, operator in zip(u, _CONTROL_OPERATORS):
        matrix = matrix + amplitude / 2 * operator

    return matrix


def lindblad_operators(gamma: float) -> list[np.ndarray]:
    """
    Builds the collective dephasing and raising/lowering jump operators

    :param gamma: The uniform decoherence rate
    :return: ``[Γz, Γ+, Γ-]``
    """

    if gamma < 0:
        raise ValueError(f"decoherence rate must be non-negative, got {gamma}")

    root = np.sqrt(gamma)
    sx = qubit_operator("x", 1) + qubit_operator("x", 2)
    sy = qubit_operator("y", 1) + qubit_operator("y", 2)
    sz = qubit_operator("z", 1) + qubit_operator("z", 2)

    return [root * sz / 2,
            root * sx / 2 + 1j * root * sy / 2,
            root * sx / 2 - 1j * root * sy / 2]


def vectorize(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """
    Converts a density matrix into its real vector representation

    :param rho: The density matrix
    :return: ``[Re(R), Im(R)]`` where ``R`` stacks the columns of ``rho``
    """

    entries = np.asarray(rho, dtype=complex)
    stacked = entries.flatten(order="F")
    return np.concatenate([stacked.real, stacked.imag])


def densify(x: np.ndarray) -> DensityMatrix:
    """
    Converts a real vector representation back into a density matrix

    :param x: A vector of length 32
    :return: The density matrix whose `vectorize` is ``x``
    """

    x = np.asarray(x, dtype=float)
    if x.shape != (STATE_SIZE,):
        raise ValueError(f"vectorized state must have length {STATE_SIZE}, got shape {x.shape}")

    half = STATE_SIZE // 2
    return DensityMatrix((x[:half] + 1j * x[half:]).reshape((DIMENSION, DIMENSION), order="F"))


def population_sum(x: np.ndarray) -> np.ndarray:
    """
    :param x: Vectorized states along the last axis
    :return: The trace functional, i.e. the sum of the population coordinates
    """

    return np.asarray(x)[..., list(POPULATION_INDICES)].sum(axis=-1)


def commutator_superoperator(H: np.ndarray) -> np.ndarray:
    """
    Builds the complex superoperator of ``ρ -> -i[H, ρ]`` under column stacking

    :param H: A square matrix
    :return: ``-i (I ⊗ H - H' ⊗ I)``
    """

    identity = np.eye(H.shape[0])
    return -1j * (np.kron(identity, H) - np.kron(H.T, identity))


def dissipator_superoperator(operators: Sequence[np.ndarray]) -> np.ndarray:
    """
    Builds the complex superoperator of the Lindblad dissipator under column stacking

    :param operators: The jump operators
    :return: ``Σ conj(Γ) ⊗ Γ - (I ⊗ Γ†Γ + (Γ†Γ)' ⊗ I) / 2``
    """

    size = operators[0].shape[0]
    identity = np.eye(size)
    result = np.zeros((size ** 2, size ** 2), dtype=complex)

    for gamma in operators:
        product = gamma.conj().T @ gamma
        result += np.kron(gamma.conj(), gamma) - (np.kron(identity, product) + np.kron(product.T, identity)) / 2

    return result


def realify(superoperator: np.ndarray) -> np.ndarray:
    """
    Converts a complex superoperator into its action on ``[Re(R), Im(R)]``

    :param superoperator: A complex matrix ``P + iQ``
    :return: The real block matrix ``[[P, -Q], [Q, P]]``
    """

    real, imag = superoperator.real, superoperator.imag
    return np.block([[real, -imag], [imag, real]])


def build_system(J: float, gamma: float) -> SystemMatrices:
    """
    Builds the real drift and control matrices of the vectorized Lindblad equation

    :param J: The coupling strength
    :param gamma: The uniform decoherence rate
    :return: The `SystemMatrices` for these parameters
    """

    coupling = J / 4 * qubit_operator("z", 1) @ qubit_operator("z", 2)
    drift = commutator_superoperator(coupling) + dissipator_superoperator(lindblad_operators(gamma))
    controls = [realify(commutator_superoperator(operator / 2)) for operator in _CONTROL_OPERATORS]

    return SystemMatrices(realify(drift), controls, J, gamma)


def lindblad_rhs(rho: np.ndarray, J: float, gamma: float, u: Sequence[float] = (0, 0, 0, 0)) -> np.ndarray:
    """
    Evaluates the Lindblad right-hand side by direct matrix products

    :param rho: The density matrix
    :param J: The coupling strength
    :param gamma: The uniform decoherence rate
    :param u: The control amplitudes
    :return: ``-i[H, ρ] + Σ (Γ ρ Γ† - {Γ†Γ, ρ} / 2)``
    """

    rho = np.asarray(rho, dtype=complex)
    H = hamiltonian(J, u)
    result = -1j * (H @ rho - rho @ H)

    for op in lindblad_operators(gamma):
        product = op.conj().T @ op
        result += op @ rho @ op.conj().T - (product @ rho + rho @ product) / 2

    return result


def propagate_exact(system: SystemMatrices, u, x0: np.ndarray, alpha: float = 1.0, beta: float = 1.0) -> np.ndarray:
    """
    Integrates the unexpanded vectorized dynamics under a piecewise-constant pulse

    Each step is advanced by the matrix exponential of its constant generator.

    :param system: The system matrices
    :param u: A `ControlSignal`
    :param x0: The initial vectorized state(s), of shape ``(32,)`` or ``(32, P)``
    :param alpha: The drift parameter
    :param beta: The control parameter
    :return: All ``K + 1`` samples, stacked along the first axis
    """

    x = np.asarray(x0, dtype=float)
    states = [x]

    for u_k in u.samples:
        x = expm(u.dt * system.generator(u_k, alpha, beta)) @ x
        states.append(x)

    return np.stack(states)


def physicality(states: np.ndarray) -> tuple[float, float, float]:
    """
    Measures how far a collection of vectorized states is from being physical

    :param states: Vectorized states, an array of shape ``(..., 32)``
    :return: The worst trace deviation, the worst Hermiticity deviation, and the smallest eigenvalue
    """

    states = np.asarray(states, dtype=float).reshape(-1, STATE_SIZE)
    if states.shape[0] == 0:
        return 0.0, 0.0, np.inf

    half = STATE_SIZE // 2
    entries = (states[:, :half] + 1j * states[:, half:]).reshape(-1, DIMENSION, DIMENSION).transpose(0, 2, 1)
    adjoint = entries.conj().transpose(0, 2, 1)

    trace_error = np.max(np.abs(population_sum(states) - 1))
    hermitian_error = np.max(np.abs(entries - adjoint))
    min_eigenvalue = np.min(np.linalg.eigvalsh((entries + adjoint) / 2))

    return float(trace_error), float(hermitian_error), float(min_eigenvalue)


__all__ = ["DIMENSION", "STATE_SIZE", "POPULATION_INDICES", "CHANNELS",
           "pauli", "qubit_operator", "hamiltonian", "lindblad_operators", "lindblad_rhs",
           "DensityMatrix", "SystemMatrices",
           "vectorize", "densify", "population_sum",
           "commutator_superoperator", "dissipator_superoperator", "realify",
           "build_system", "propagate_exact", "physicality"]
